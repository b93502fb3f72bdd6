"""
Polynomials in the commuting quadratics q_1..q_n (and hbar).

Terms are keyed by (gamma, h) for q^gamma hbar^h. The phase-space weight of
a term is 2 |gamma| + 2 h, which is what the weight cut bounds.
"""
import logging

from normalform.commands.utils.errors import DimensionMismatch
from normalform.commands.utils.errors import ParseError
from normalform.commands.utils.linalg import invert
from normalform.commands.utils.polynomial import CoefficientKind
from normalform.commands.utils.polynomial import PolySymbol
from normalform.commands.utils.polynomial import merge_cuts
from normalform.commands.utils.polynomial import parse_coefficient

logger = logging.getLogger(__name__)


class CommutantPolynomial(object):
    __slots__ = ('n', 'terms', 'kind', 'h_cut', 'weight_cut')

    def __init__(self, n, terms=None, kind=CoefficientKind.RATIONAL, h_cut=None,
                 weight_cut=None):
        self.n = n
        self.kind = kind
        self.h_cut = h_cut
        self.weight_cut = weight_cut
        clean = {}
        for (gamma, h), value in (terms or {}).items():
            gamma = tuple(int(g) for g in gamma)
            if len(gamma) != n:
                raise DimensionMismatch('q-exponent %r is not of length %d' % (gamma, n))
            if not self._fits(gamma, h):
                continue
            value = kind.convert(value)
            key = (gamma, int(h))
            clean[key] = clean[key] + value if key in clean else value
        self.terms = dict((k, v) for k, v in clean.items() if v)

    def _fits(self, gamma, h):
        if self.h_cut is not None and h > self.h_cut:
            return False
        if self.weight_cut is not None and 2 * sum(gamma) + 2 * h > self.weight_cut:
            return False
        return True

    def _like(self, terms, kind=None, h_cut=None, weight_cut=None):
        result = object.__new__(CommutantPolynomial)
        result.n = self.n
        result.kind = kind or self.kind
        result.h_cut = self.h_cut if h_cut is None else h_cut
        result.weight_cut = self.weight_cut if weight_cut is None else weight_cut
        result.terms = dict(
            (k, v) for k, v in terms.items() if v and result._fits(*k)
        )
        return result

    @classmethod
    def zero(cls, n, kind=CoefficientKind.RATIONAL, **cuts):
        return cls(n, {}, kind=kind, **cuts)

    @classmethod
    def constant(cls, n, value, kind=CoefficientKind.RATIONAL, **cuts):
        return cls(n, {((0,) * n, 0): value}, kind=kind, **cuts)

    @classmethod
    def variable(cls, n, j, kind=CoefficientKind.RATIONAL, **cuts):
        gamma = [0] * n
        gamma[j] = 1
        return cls(n, {(tuple(gamma), 0): 1}, kind=kind, **cuts)

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def __iter__(self):
        for key in sorted(self.terms, key=lambda k: (sum(k[0]), k[1], tuple(-g for g in k[0]))):
            yield key, self.terms[key]

    def constant_term(self):
        return self.terms.get(((0,) * self.n, 0), self.kind.zero)

    def hbar_free(self):
        return all(h == 0 for _, h in self.terms)

    def hbar_coefficient(self, h):
        return self._like(dict(
            ((gamma, 0), v) for (gamma, hh), v in self.terms.items() if hh == h
        ))

    def times_hbar(self, power=1):
        return self._like(dict(
            ((gamma, h + power), v) for (gamma, h), v in self.terms.items()
        ))

    def as_kind(self, kind):
        if kind is self.kind:
            return self
        return self._like(dict((k, kind.convert(v)) for k, v in self.terms.items()), kind=kind)

    def truncate(self, h_cut=None, weight_cut=None):
        return self._like(
            self.terms,
            h_cut=merge_cuts(self.h_cut, h_cut),
            weight_cut=merge_cuts(self.weight_cut, weight_cut),
        )

    def _operand(self, other):
        if isinstance(other, CommutantPolynomial):
            if other.n != self.n:
                raise DimensionMismatch('Commutant polynomials in %d and %d variables'
                                        % (self.n, other.n))
            if other.kind is not self.kind:
                kind = CoefficientKind.common(self.kind, other.kind)
                return other.as_kind(kind), kind
            return other, self.kind
        return CommutantPolynomial.constant(self.n, other, kind=self.kind), self.kind

    def __add__(self, other):
        other, kind = self._operand(other)
        me = self.as_kind(kind)
        terms = dict(me.terms)
        for k, v in other.terms.items():
            terms[k] = terms[k] + v if k in terms else v
        return me._like(terms, h_cut=merge_cuts(self.h_cut, other.h_cut),
                        weight_cut=merge_cuts(self.weight_cut, other.weight_cut))

    __radd__ = __add__

    def __neg__(self):
        return self._like(dict((k, -v) for k, v in self.terms.items()))

    def __sub__(self, other):
        other, _ = self._operand(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, value):
        value = self.kind.convert(value)
        return self._like(dict((k, v * value) for k, v in self.terms.items()))

    def __mul__(self, other):
        if not isinstance(other, CommutantPolynomial):
            return self.scale(other)
        other, kind = self._operand(other)
        me = self.as_kind(kind)
        h_cut = merge_cuts(self.h_cut, other.h_cut)
        weight_cut = merge_cuts(self.weight_cut, other.weight_cut)
        terms = {}
        for (g1, h1), v1 in me.terms.items():
            for (g2, h2), v2 in other.terms.items():
                gamma = tuple(a + b for a, b in zip(g1, g2))
                h = h1 + h2
                if h_cut is not None and h > h_cut:
                    continue
                if weight_cut is not None and 2 * (sum(gamma) + h) > weight_cut:
                    continue
                key = (gamma, h)
                value = v1 * v2
                terms[key] = terms[key] + value if key in terms else value
        return me._like(terms, h_cut=h_cut, weight_cut=weight_cut)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if isinstance(other, CommutantPolynomial):
            return self.n == other.n and self.terms == other.terms
        try:
            return self == CommutantPolynomial.constant(self.n, other, kind=self.kind)
        except Exception:
            return NotImplemented

    __hash__ = None

    def partial_derivative(self, j):
        terms = {}
        for (gamma, h), v in self.terms.items():
            if not gamma[j]:
                continue
            lowered = gamma[:j] + (gamma[j] - 1,) + gamma[j + 1:]
            terms[(lowered, h)] = v * self.kind.convert(gamma[j])
        return self._like(terms)

    def expand(self, basis, **cuts):
        """Phase-space symbol obtained by substituting the quadratics basis."""
        if len(basis) != self.n:
            raise DimensionMismatch('Need %d basis symbols' % self.n)
        phase_n = basis[0].n
        kind = CoefficientKind.common(self.kind, *[b.kind for b in basis])
        basis = [b.as_kind(kind).truncate(**cuts) for b in basis]
        one = PolySymbol.constant(phase_n, 1, kind=kind, **cuts)
        powers = [[one] for _ in basis]
        result = PolySymbol.zero(phase_n, kind=kind, **cuts)
        for (gamma, h), v in self:
            term = PolySymbol.monomial(phase_n, (0,) * (2 * phase_n), h=h,
                                       coeff=kind.convert(v), kind=kind, **cuts)
            for j, e in enumerate(gamma):
                if not e:
                    continue
                cache = powers[j]
                while len(cache) <= e:
                    cache.append(cache[-1] * basis[j])
                term = term * cache[e]
            result = result + term
        return result

    def to_json(self):
        return [
            {'q': list(gamma), 'h': h, 'coeff': self.kind.to_json(v)}
            for (gamma, h), v in self
        ]

    @classmethod
    def from_json(cls, n, entries, kind):
        terms = {}
        for entry in entries:
            try:
                key = (tuple(entry['q']), int(entry.get('h', 0)))
                value = parse_coefficient(entry['coeff'], kind)
            except (KeyError, TypeError, ValueError) as e:
                raise ParseError('Malformed commutant term %r: %s' % (entry, e))
            terms[key] = terms[key] + value if key in terms else value
        return cls(n, terms, kind=kind)

    def __repr__(self):
        return 'CommutantPolynomial(%s)' % (self.to_json(),)


def commutant_matrix_constant(matrix):
    """Values at q = 0, hbar = 0 of a matrix of commutant polynomials."""
    return [[entry.constant_term() for entry in row] for row in matrix]


def jacobian(polynomials):
    """d F_i / d q_j as a matrix of commutant polynomials."""
    n = polynomials[0].n
    return [[p.partial_derivative(j) for j in range(n)] for p in polynomials]


def matrix_product(left, right):
    inner = len(right)
    result = []
    for row in left:
        new_row = []
        for j in range(len(right[0])):
            total = row[0] * right[0][j]
            for k in range(1, inner):
                total = total + row[k] * right[k][j]
            new_row.append(total)
        result.append(new_row)
    return result


def matrix_vector(matrix, vector):
    result = []
    for row in matrix:
        total = row[0] * vector[0]
        for entry, value in zip(row[1:], vector[1:]):
            total = total + entry * value
        result.append(total)
    return result


def scalar_matrix(rows, n, kind, **cuts):
    return [[CommutantPolynomial.constant(n, v, kind=kind, **cuts) for v in row] for row in rows]


def matrix_inverse(matrix, weight_cut, inverse_at_zero=None):
    """
    Inverse of a matrix of commutant polynomials invertible at zero

    Neumann series M^-1 = sum_k (-N)^k M0^-1 with N = M0^-1 (M - M0); every
    power of N raises the weight, so the series stops at the weight cut.
    """
    size = len(matrix)
    n = matrix[0][0].n
    kind = CoefficientKind.common(*[entry.kind for row in matrix for entry in row])
    M0 = commutant_matrix_constant(matrix)
    if inverse_at_zero is None:
        inverse_at_zero = invert([[kind.convert(v) for v in row] for row in M0], kind)
    cuts = dict(weight_cut=weight_cut)
    inv0 = scalar_matrix(inverse_at_zero, n, kind, **cuts)
    rest = [[(matrix[i][j] - M0[i][j]).as_kind(kind).truncate(**cuts) for j in range(size)]
            for i in range(size)]
    N = matrix_product(inv0, rest)
    result = inv0
    power = inv0
    for _ in range(weight_cut // 2 + 1):
        power = [[-entry for entry in row] for row in matrix_product(N, power)]
        if all(entry.is_zero() for row in power for entry in row):
            break
        result = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(result, power)]
    return result
