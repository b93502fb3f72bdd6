"""
Linear systems shared by the homological solver and the frame builders.

Exact kinds are solved over sympy's QQ / QQ_I with sparse DomainMatrix
row reduction; float kinds with numpy least squares.
"""
import logging

import numpy
from scipy import linalg as scipy_linalg
from sympy import QQ
from sympy import QQ_I
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

from normalform.commands.utils.errors import SingularM0
from normalform.commands.utils.polynomial import CoefficientKind

logger = logging.getLogger(__name__)

TOL_RANK = 1e-10


def exact_domain(kind):
    if kind is CoefficientKind.RATIONAL:
        return QQ
    if kind is CoefficientKind.GAUSSIAN:
        return QQ_I
    raise ValueError('%s coefficients have no exact domain' % kind.value)


def numpy_dtype(kind):
    return complex if kind.is_complex else float


class LinearSystem(object):
    """
    A fixed m x p matrix prepared for repeated solves

    Exact kinds reduce [A | I] once, so each right-hand side costs one sparse
    product; the rows beyond the rank carry the consistency conditions.
    """

    def __init__(self, entries, shape, kind, tol=TOL_RANK):
        self.shape = shape
        self.kind = kind
        self.tol = tol
        rows, cols = shape
        if kind.is_exact:
            self._prepare_exact(entries, rows, cols)
        else:
            self._prepare_float(entries, rows, cols)

    def _prepare_exact(self, entries, rows, cols):
        domain = exact_domain(self.kind)
        dok = dict(((i, j), v) for (i, j), v in entries.items() if v)
        for i in range(rows):
            dok[(i, cols + i)] = domain.one
        reduced, pivots = DomainMatrix.from_dok(dok, (rows, cols + rows), domain).rref()
        self.rank = len([p for p in pivots if p < cols])
        self._pivots = pivots[:self.rank]
        self._reduced = {}
        self._transform = {}
        for (i, j), value in reduced.to_dok().items():
            if j < cols:
                self._reduced.setdefault(i, {})[j] = value
            else:
                self._transform.setdefault(i, {})[j - cols] = value

    def _prepare_float(self, entries, rows, cols):
        matrix = numpy.zeros((rows, cols), dtype=numpy_dtype(self.kind))
        for (i, j), value in entries.items():
            matrix[i, j] = value
        self._matrix = matrix
        self._scale = max(1.0, numpy.abs(matrix).max() if matrix.size else 0.0)
        if matrix.size:
            self.rank = int(numpy.linalg.matrix_rank(matrix, tol=self.tol * self._scale))
        else:
            self.rank = 0

    @property
    def nullity(self):
        return self.shape[1] - self.rank

    def solve(self, rhs):
        """
        Solution of A x = rhs, or None when the system is inconsistent

        Free variables are set to zero in exact mode; float mode returns the
        minimum-norm least squares solution.
        """
        if self.kind.is_exact:
            return self._solve_exact(rhs)
        return self._solve_float(rhs)

    def _solve_exact(self, rhs):
        zero = self.kind.zero
        image = {}
        for i, row in self._transform.items():
            value = zero
            for j, coeff in row.items():
                if rhs[j]:
                    value += coeff * rhs[j]
            if value:
                image[i] = value
        if any(i >= self.rank for i in image):
            return None
        solution = [zero] * self.shape[1]
        for i, column in enumerate(self._pivots):
            if i in image:
                solution[column] = image[i]
        return solution

    def _solve_float(self, rhs):
        rhs = numpy.asarray(rhs, dtype=numpy_dtype(self.kind))
        if not self._matrix.size:
            return [] if not numpy.any(numpy.abs(rhs) > self.tol) else None
        solution = numpy.linalg.lstsq(self._matrix, rhs, rcond=None)[0]
        residual = numpy.abs(self._matrix.dot(solution) - rhs).max()
        if residual > self.tol * max(self._scale, numpy.abs(rhs).max()) * 1e3:
            return None
        return [self.kind.convert(v) for v in solution]

    def kernel(self):
        """Basis of the right null space, one list per vector."""
        cols = self.shape[1]
        if not self.kind.is_exact:
            if not self._matrix.size:
                return [[self.kind.convert(float(i == j)) for i in range(cols)]
                        for j in range(cols)]
            null = scipy_linalg.null_space(self._matrix, rcond=self.tol)
            return [[self.kind.convert(v) for v in null[:, j]] for j in range(null.shape[1])]
        pivot_set = set(self._pivots)
        basis = []
        for free in range(cols):
            if free in pivot_set:
                continue
            vector = [self.kind.zero] * cols
            vector[free] = self.kind.one
            for i, column in enumerate(self._pivots):
                value = self._reduced.get(i, {}).get(free)
                if value:
                    vector[column] = -value
            basis.append(vector)
        return basis


def invert(rows, kind):
    """Inverse of a square matrix given as nested lists of kind elements."""
    size = len(rows)
    if kind.is_exact:
        domain = exact_domain(kind)
        matrix = DomainMatrix([[domain.convert(v) for v in row] for row in rows],
                              (size, size), domain)
        try:
            return matrix.inv().to_list()
        except (DMNonInvertibleMatrixError, ZeroDivisionError):
            raise SingularM0('Matrix %s is singular' % _render(rows, kind))
    matrix = numpy.array(rows, dtype=numpy_dtype(kind))
    if numpy.linalg.cond(matrix) > 1.0 / TOL_RANK:
        raise SingularM0('Matrix %s is singular' % _render(rows, kind))
    return [[kind.convert(v) for v in row] for row in numpy.linalg.inv(matrix)]


def matmul(left, right, kind):
    zero = kind.zero
    inner = len(right)
    return [
        [sum((row[k] * right[k][j] for k in range(inner)), zero)
         for j in range(len(right[0]))]
        for row in left
    ]


def matvec(matrix, vector, kind):
    zero = kind.zero
    return [sum((a * b for a, b in zip(row, vector)), zero) for row in matrix]


def identity(size, kind):
    return [[kind.one if i == j else kind.zero for j in range(size)] for i in range(size)]


def exact_rank(rows, kind=CoefficientKind.RATIONAL):
    if not rows:
        return 0
    domain = exact_domain(kind)
    return DomainMatrix(
        [[domain.convert(v) for v in row] for row in rows],
        (len(rows), len(rows[0])),
        domain,
    ).rank()


def _render(rows, kind):
    return [[kind.to_json(v) for v in row] for row in rows]
