"""
Homological equation for a commuting family of quadratics.

Given a standard basis q_1..q_n and compatible right-hand sides g_i, find f
and F_i in the commutant of the q_j with

    {q_i, f} = g_i - F_i        for every i.

ad_q = {q, .} with q = sum lambda_i q_i preserves the degree and the hbar
power, and for nonresonant integer lambda its kernel on P_k is exactly the
span of the degree-k products of the q_j. Each (degree, hbar power) block is
solved with one augmented system [ad_q | kernel basis].
"""
import itertools
import logging
from collections import namedtuple

from normalform.commands.utils.brackets import poisson
from normalform.commands.utils.brackets import promote
from normalform.commands.utils.commutant import CommutantPolynomial
from normalform.commands.utils.errors import DimensionMismatch
from normalform.commands.utils.errors import IncompatibleSystem
from normalform.commands.utils.errors import NotInKernel
from normalform.commands.utils.errors import ResonanceDetected
from normalform.commands.utils.linalg import LinearSystem
from normalform.commands.utils.polynomial import GradedComponent
from normalform.commands.utils.polynomial import Monomial
from normalform.commands.utils.polynomial import PolySymbol
from normalform.commands.utils.polynomial import grade_component
from normalform.commands.utils.polynomial import merge_cuts
from normalform.commands.utils.polynomial import monomial_basis
from normalform.commands.utils.polynomial import monomial_index

logger = logging.getLogger(__name__)

TOL_BRACKET = 1e-10
MAX_BASE_RETRIES = 4


def nonresonant_lambda(q_list, N, base=None):
    """
    Integer weights (base^0, base^1, ...) with base = N + 1 by default

    No integer vector d with 0 < max |d_i| <= N has sum lambda_i d_i = 0,
    which is all that ad_q needs on monomials of degree at most N.
    """
    if N < 1:
        raise ValueError('Need a degree of at least 1, got %r' % N)
    base = N + 1 if base is None else base
    return [base ** i for i in range(len(q_list))]


def q_exponents(n, d):
    """Exponent vectors gamma with |gamma| = d, larger leading entries first."""
    return sorted(
        (gamma for gamma in itertools.product(range(d + 1), repeat=n) if sum(gamma) == d),
        reverse=True,
    )


def kernel_dimension(n, k):
    return len(q_exponents(n, k // 2)) if k % 2 == 0 else 0


def _scale(symbols):
    return max([1.0] + [s.max_abs() for s in symbols])


def _is_negligible(symbol, scale, tol=TOL_BRACKET):
    if symbol.kind.is_exact:
        return symbol.is_zero()
    return symbol.chop(tol * scale).is_zero()


def compatibility_defects(g_list, q_list, N=None, tol=TOL_BRACKET):
    """
    Pairs (i, j, degree) where {g_i, q_j} != {g_j, q_i}

    Arguments:
    g_list <list> -- Right-hand sides
    q_list <list> -- Standard basis
    N <int> -- Only degrees up to N are checked
    tol <float> -- Relative slack for float kinds
    """
    scale = _scale(g_list)
    defects = []
    for i, j in itertools.combinations(range(len(q_list)), 2):
        defect = poisson(g_list[i], q_list[j]) - poisson(g_list[j], q_list[i])
        if N is not None:
            defect = defect.truncate(deg_cut=N)
        if not _is_negligible(defect, scale, tol):
            if not defect.kind.is_exact:
                defect = defect.chop(tol * scale)
            defects.append((i, j, defect.min_degree()))
    return defects


def check_compatibility(g_list, q_list, N=None, tol=TOL_BRACKET):
    return not compatibility_defects(g_list, q_list, N=N, tol=tol)


class _DegreeBlock(object):
    """ad_q on P_k with its kernel, prepared for repeated solves."""

    def __init__(self, q, n, k, kind):
        self.k = k
        self.kind = kind
        self.size = len(monomial_basis(n, k))
        index = monomial_index(n, k)
        entries = {}
        for column, exps in enumerate(monomial_basis(n, k)):
            image = poisson(q, PolySymbol.monomial(n, exps, kind=kind))
            for m, value in image.terms.items():
                entries[(index[m.exps], column)] = value
        ad = LinearSystem(entries, (self.size, self.size), kind)
        self.nullity = ad.nullity
        self.kernel = ad.kernel()
        for c, vector in enumerate(self.kernel):
            for row, value in enumerate(vector):
                if value:
                    entries[(row, self.size + c)] = value
        self.augmented = LinearSystem(entries, (self.size, self.size + len(self.kernel)), kind)

    def split(self, rhs):
        """Return (preimage, kernel part) of rhs = ad_q(preimage) + kernel part."""
        solution = self.augmented.solve(rhs)
        if solution is None:
            raise ResonanceDetected('Degree %d block does not split as ker + im' % self.k)
        preimage = solution[:self.size]
        weights = solution[self.size:]
        kernel_part = [self.kind.zero] * self.size
        for weight, vector in zip(weights, self.kernel):
            if weight:
                kernel_part = [a + weight * b for a, b in zip(kernel_part, vector)]
        return preimage, kernel_part


class HomologicalSolution(namedtuple('HomologicalSolution', ['f', 'F_list', 'residuals', 'lam'])):
    __slots__ = ()

    def is_exact(self, tol=TOL_BRACKET):
        scale = _scale(self.F_list + [self.f])
        return all(_is_negligible(r, scale, tol) for r in self.residuals)

    def commutant_coordinates(self, basis):
        return [to_commutant(F, basis) for F in self.F_list]


class HomologicalSolver(object):
    """
    Caches ad_q blocks of one standard basis across right-hand sides

    Arguments:
    q_list <list> -- Standard basis, quadratic PolySymbols
    max_degree <int> -- Highest degree that will be solved, fixes lambda
    base <int> -- Override of the lambda base, defaults to max_degree + 1
    """

    def __init__(self, q_list, max_degree, base=None):
        self.q_list = list(q_list)
        self.n = q_list[0].n
        self.max_degree = max_degree
        self.base = max_degree + 1 if base is None else base
        self._blocks = {}

    @property
    def lam(self):
        return nonresonant_lambda(self.q_list, self.max_degree, base=self.base)

    def _combined(self, kind):
        total = PolySymbol.zero(self.n, kind=kind)
        for weight, q in zip(self.lam, self.q_list):
            total = total + q.as_kind(kind).scale(weight)
        return total

    def block(self, k, kind):
        key = (k, kind)
        if key in self._blocks:
            return self._blocks[key]
        expected = kernel_dimension(self.n, k)
        for _ in range(MAX_BASE_RETRIES + 1):
            block = _DegreeBlock(self._combined(kind), self.n, k, kind)
            if block.nullity == expected:
                self._blocks[key] = block
                return block
            logger.warning('Kernel of dimension %d instead of %d on degree %d with base %d, retrying',
                           block.nullity, expected, k, self.base)
            self.base += 1
            self._blocks = {}
        raise ResonanceDetected(
            'ad_q has a kernel of dimension %d on degree %d, expected %d'
            % (block.nullity, k, expected)
        )

    def kernel_basis(self, k, kind=None):
        kind = kind or self.q_list[0].kind
        block = self.block(k, kind)
        return [GradedComponent(self.n, k, 0, tuple(vector), kind) for vector in block.kernel]

    def solve(self, g_list, N):
        if len(g_list) != len(self.q_list):
            raise DimensionMismatch('Need %d right-hand sides, got %d'
                                    % (len(self.q_list), len(g_list)))
        symbols = promote(*(list(self.q_list) + list(g_list)))
        q_list, g_list = symbols[:self.n], symbols[self.n:]
        kind = g_list[0].kind
        defects = compatibility_defects(g_list, q_list, N=N)
        if defects:
            i, j, degree = defects[0]
            raise IncompatibleSystem(
                (i, j), 'Right-hand sides %d and %d are not closed at degree %d' % (i, j, degree)
            )
        deg_cut = merge_cuts(N, *[g.deg_cut for g in g_list])
        h_cut = merge_cuts(*[g.h_cut for g in g_list])
        weight_cut = merge_cuts(*[g.weight_cut for g in g_list])
        blocks = sorted(set(
            key for g in g_list for key in g.graded_blocks() if key[0] <= N
        ))
        f_terms = {}
        F_terms = [{} for _ in g_list]
        for k, h in blocks:
            block = self.block(k, kind)
            basis = monomial_basis(self.n, k)
            combined = [kind.zero] * block.size
            for i, (weight, g) in enumerate(zip(self.lam, g_list)):
                rhs = list(grade_component(g, k, h).coeffs)
                _, kernel_part = block.split(rhs)
                for exps, value in zip(basis, kernel_part):
                    if value:
                        F_terms[i][Monomial(exps, h)] = value
                weight = kind.convert(weight)
                combined = [c + weight * (r - p) for c, r, p in zip(combined, rhs, kernel_part)]
            preimage, _ = block.split(combined)
            _, drift = block.split(preimage)
            for exps, value, shift in zip(basis, preimage, drift):
                value = value - shift
                if value:
                    f_terms[Monomial(exps, h)] = value
            logger.debug('Solved homological block of degree %d, hbar^%d', k, h)
        cuts = dict(deg_cut=deg_cut, h_cut=h_cut, weight_cut=weight_cut)
        f = PolySymbol(self.n, f_terms, kind=kind, **cuts)
        F_list = [PolySymbol(self.n, terms, kind=kind, **cuts) for terms in F_terms]
        residuals = [
            (poisson(q, f) - g + F).truncate(deg_cut=N)
            for q, g, F in zip(q_list, g_list, F_list)
        ]
        solution = HomologicalSolution(f, F_list, residuals, self.lam)
        if not solution.is_exact():
            raise ResonanceDetected('Homological residuals do not vanish up to degree %d' % N)
        return solution


def kernel_basis(q_list, k, base=None):
    """Basis of the common kernel of ad_{q_i} on homogeneous degree-k symbols."""
    return HomologicalSolver(q_list, max(k, 1), base=base).kernel_basis(k)


def solve_homological(q_list, g_list, N, base=None):
    return HomologicalSolver(q_list, N, base=base).solve(g_list, N)


def to_commutant(p, basis):
    """
    Coordinates of a symbol of the commutant as a polynomial in the basis

    Raises NotInKernel when some (degree, hbar power) block of p is not a
    combination of products of the basis quadratics.
    """
    symbols = promote(p, *basis)
    p, basis = symbols[0], symbols[1:]
    n = len(basis)
    kind = p.kind
    powers = {}

    def power(gamma):
        if gamma not in powers:
            result = PolySymbol.constant(p.n, 1, kind=kind)
            for b, e in zip(basis, gamma):
                for _ in range(e):
                    result = result * b
            powers[gamma] = result
        return powers[gamma]

    terms = {}
    for k, h in p.graded_blocks():
        if k % 2:
            raise NotInKernel('Odd degree %d part is not a function of the quadratics' % k)
        gammas = q_exponents(n, k // 2)
        index = monomial_index(p.n, k)
        entries = {}
        for column, gamma in enumerate(gammas):
            for m, value in power(gamma).terms.items():
                entries[(index[m.exps], column)] = value
        system = LinearSystem(entries, (len(index), len(gammas)), kind)
        solution = system.solve(list(grade_component(p, k, h).coeffs))
        if solution is None:
            raise NotInKernel('Degree %d, hbar^%d part is not a function of the quadratics' % (k, h))
        for gamma, value in zip(gammas, solution):
            if value:
                terms[(gamma, h)] = value
    weight_cut = p.weight_cut
    if weight_cut is None and p.deg_cut is not None and p.h_cut is not None:
        weight_cut = p.deg_cut + 2 * p.h_cut
    return CommutantPolynomial(n, terms, kind=kind, h_cut=p.h_cut, weight_cut=weight_cut)
