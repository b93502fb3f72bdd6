"""
Sparse truncated symbols in x_1..x_n, xi_1..xi_n and hbar.

A PolySymbol is an immutable map Monomial -> coefficient. Coefficients of one
symbol share a single CoefficientKind: exact rationals (sympy QQ), Gaussian
rationals (sympy QQ_I), floats or complex floats. Three independent cuts bound
the stored terms: the phase degree (deg_cut), the hbar power (h_cut) and the
weight, phase degree + 2 * hbar power (weight_cut). A cut of None is unbounded.
"""
import enum
import functools
import logging
import numbers
from collections import namedtuple
from fractions import Fraction

import sympy
from sympy import QQ
from sympy import QQ_I

from normalform.commands.utils.errors import CoefficientKindMismatch
from normalform.commands.utils.errors import DimensionMismatch
from normalform.commands.utils.errors import ParseError
from normalform.commands.utils.errors import TruncationError

logger = logging.getLogger(__name__)


def _qq_to_float(value):
    return int(value.numerator) / int(value.denominator)


def _qq_to_string(value):
    return str(Fraction(int(value.numerator), int(value.denominator)))


def _to_rational(value):
    if QQ.of_type(value):
        return value
    if isinstance(value, bool):
        raise CoefficientKindMismatch('Booleans are not coefficients')
    if isinstance(value, numbers.Integral):
        return QQ(int(value))
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, str):
        try:
            parsed = Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ParseError('"%s" is not a rational number' % value)
        return QQ(parsed.numerator, parsed.denominator)
    if isinstance(value, sympy.Rational):
        return QQ(int(value.p), int(value.q))
    if QQ_I.of_type(value):
        if value.y:
            raise CoefficientKindMismatch(
                '%s has a nonzero imaginary part' % value
            )
        return value.x
    raise CoefficientKindMismatch(
        'Cannot use %r as an exact rational coefficient' % (value,)
    )


def _to_gaussian(value):
    if QQ_I.of_type(value):
        return value
    if isinstance(value, complex):
        raise CoefficientKindMismatch(
            'Cannot use %r as a Gaussian rational coefficient' % (value,)
        )
    if isinstance(value, sympy.Basic) and not isinstance(value, sympy.Rational):
        try:
            return QQ_I.from_sympy(value)
        except sympy.polys.polyerrors.CoercionFailed:
            raise CoefficientKindMismatch(
                'Cannot use %s as a Gaussian rational coefficient' % value
            )
    return QQ_I(_to_rational(value), 0)


def _to_float(value):
    if isinstance(value, float):
        return value
    if QQ.of_type(value):
        return _qq_to_float(value)
    if QQ_I.of_type(value):
        if value.y:
            raise CoefficientKindMismatch(
                '%s has a nonzero imaginary part' % value
            )
        return _qq_to_float(value.x)
    if isinstance(value, str):
        return _qq_to_float(_to_rational(value))
    if isinstance(value, numbers.Real) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, sympy.Basic) and value.is_real:
        return float(value)
    raise CoefficientKindMismatch('Cannot use %r as a float coefficient' % (value,))


def _to_complex(value):
    if isinstance(value, complex):
        return value
    if QQ_I.of_type(value):
        return complex(_qq_to_float(value.x), _qq_to_float(value.y))
    if isinstance(value, numbers.Complex) and not isinstance(value, numbers.Real):
        return complex(value)
    if isinstance(value, sympy.Basic) and not isinstance(value, sympy.Rational):
        return complex(value)
    return complex(_to_float(value))


class CoefficientKind(enum.Enum):
    RATIONAL = 'rational'
    GAUSSIAN = 'gaussian'
    FLOAT = 'float'
    COMPLEX = 'complex'

    @property
    def is_exact(self):
        return self in (CoefficientKind.RATIONAL, CoefficientKind.GAUSSIAN)

    @property
    def is_complex(self):
        return self in (CoefficientKind.GAUSSIAN, CoefficientKind.COMPLEX)

    @property
    def zero(self):
        return _ZEROS[self]

    @property
    def one(self):
        return _ONES[self]

    @property
    def imaginary_unit(self):
        if self is CoefficientKind.GAUSSIAN:
            return QQ_I(0, 1)
        if self is CoefficientKind.COMPLEX:
            return 1j
        raise CoefficientKindMismatch('%s coefficients are real' % self.value)

    def complexified(self):
        if self is CoefficientKind.RATIONAL:
            return CoefficientKind.GAUSSIAN
        if self is CoefficientKind.FLOAT:
            return CoefficientKind.COMPLEX
        return self

    def realified(self):
        if self is CoefficientKind.GAUSSIAN:
            return CoefficientKind.RATIONAL
        if self is CoefficientKind.COMPLEX:
            return CoefficientKind.FLOAT
        return self

    def floated(self):
        if self is CoefficientKind.RATIONAL:
            return CoefficientKind.FLOAT
        if self is CoefficientKind.GAUSSIAN:
            return CoefficientKind.COMPLEX
        return self

    def convert(self, value):
        return _CONVERTERS[self](value)

    def real_part(self, value):
        if self is CoefficientKind.GAUSSIAN:
            return value.x
        if self is CoefficientKind.COMPLEX:
            return value.real
        return value

    def imag_part(self, value):
        if self is CoefficientKind.GAUSSIAN:
            return value.y
        if self is CoefficientKind.COMPLEX:
            return value.imag
        return self.zero

    def magnitude(self, value):
        """Float size of a coefficient, used for tolerances."""
        if self is CoefficientKind.RATIONAL:
            return abs(_qq_to_float(value))
        if self is CoefficientKind.GAUSSIAN:
            return abs(complex(_qq_to_float(value.x), _qq_to_float(value.y)))
        return abs(value)

    def to_json(self, value):
        if self is CoefficientKind.RATIONAL:
            return _qq_to_string(value)
        if self is CoefficientKind.GAUSSIAN:
            return {'re': _qq_to_string(value.x), 'im': _qq_to_string(value.y)}
        if self is CoefficientKind.COMPLEX:
            return {'re': value.real, 'im': value.imag}
        return value

    @staticmethod
    def common(*kinds):
        """Smallest kind holding all given kinds; exact and float never mix."""
        kinds = set(kinds)
        if len(kinds) == 1:
            return kinds.pop()
        exact = set(k.is_exact for k in kinds)
        if len(exact) > 1:
            raise CoefficientKindMismatch(
                'Cannot mix exact and float coefficients: %s'
                % ', '.join(sorted(k.value for k in kinds))
            )
        if exact.pop():
            return CoefficientKind.GAUSSIAN
        return CoefficientKind.COMPLEX


_ZEROS = {
    CoefficientKind.RATIONAL: QQ.zero,
    CoefficientKind.GAUSSIAN: QQ_I.zero,
    CoefficientKind.FLOAT: 0.0,
    CoefficientKind.COMPLEX: 0j,
}

_ONES = {
    CoefficientKind.RATIONAL: QQ.one,
    CoefficientKind.GAUSSIAN: QQ_I.one,
    CoefficientKind.FLOAT: 1.0,
    CoefficientKind.COMPLEX: 1 + 0j,
}

_CONVERTERS = {
    CoefficientKind.RATIONAL: _to_rational,
    CoefficientKind.GAUSSIAN: _to_gaussian,
    CoefficientKind.FLOAT: _to_float,
    CoefficientKind.COMPLEX: _to_complex,
}


def parse_coefficient(raw, kind):
    """
    Read a JSON coefficient into the given kind

    Arguments:
    raw <string|number|dict> -- "p/q", a number or {"re": .., "im": ..}
    kind <CoefficientKind> -- Target coefficient kind
    """
    if isinstance(raw, dict):
        if set(raw) - set(['re', 'im']):
            raise ParseError('Unknown coefficient fields %s' % sorted(raw))
        re_part = raw.get('re', 0)
        im_part = raw.get('im', 0)
        if kind.is_exact:
            value = QQ_I(
                _to_rational(_exact_from_json(re_part)),
                _to_rational(_exact_from_json(im_part)),
            )
        else:
            value = complex(_to_float(re_part), _to_float(im_part))
        return kind.convert(value)
    if isinstance(raw, bool) or raw is None:
        raise ParseError('%r is not a coefficient' % (raw,))
    if kind.is_exact:
        return kind.convert(_exact_from_json(raw))
    return kind.convert(raw)


def _exact_from_json(raw):
    # floats in exact mode are read through their shortest decimal repr
    if isinstance(raw, float):
        return Fraction(repr(raw))
    return raw


def infer_kind(raw_coefficients):
    """Kind implied by raw JSON coefficients: strings and ints are exact."""
    exact = True
    complex_ = False
    for raw in raw_coefficients:
        values = [raw.get('re', 0), raw.get('im', 0)] if isinstance(raw, dict) else [raw]
        if isinstance(raw, dict):
            complex_ = True
        for value in values:
            if isinstance(value, float):
                exact = False
    if exact:
        return CoefficientKind.GAUSSIAN if complex_ else CoefficientKind.RATIONAL
    return CoefficientKind.COMPLEX if complex_ else CoefficientKind.FLOAT


class Monomial(namedtuple('Monomial', ['exps', 'h'])):
    """x^alpha xi^beta hbar^h, stored as exps = alpha + beta."""
    __slots__ = ()

    @property
    def n(self):
        return len(self.exps) // 2

    @property
    def x_exp(self):
        return self.exps[:self.n]

    @property
    def xi_exp(self):
        return self.exps[self.n:]

    @property
    def degree(self):
        return sum(self.exps)

    @property
    def weight(self):
        return sum(self.exps) + 2 * self.h

    def sort_key(self):
        return (sum(self.exps), self.h, tuple(-e for e in self.exps))


def _as_monomial(n, key):
    if isinstance(key, Monomial):
        exps, h = key.exps, key.h
    elif len(key) == 2 and len(key[0]) == 2 * n:
        exps, h = tuple(key[0]), key[1]
    else:
        x_exp, xi_exp = tuple(key[0]), tuple(key[1])
        h = key[2] if len(key) > 2 else 0
        if len(x_exp) != n or len(xi_exp) != n:
            raise DimensionMismatch(
                'Monomial %r does not have %d x and xi exponents' % (key, n)
            )
        exps = x_exp + xi_exp
    if len(exps) != 2 * n:
        raise DimensionMismatch('Monomial %r is not in %d variables' % (key, 2 * n))
    exps = tuple(int(e) for e in exps)
    if min(exps + (int(h),)) < 0:
        raise ValueError('Negative exponent in monomial %r' % (key,))
    return Monomial(exps, int(h))


def merge_cuts(*cuts):
    present = [c for c in cuts if c is not None]
    return min(present) if present else None


def _within(degree, h, deg_cut, h_cut, weight_cut):
    if deg_cut is not None and degree > deg_cut:
        return False
    if h_cut is not None and h > h_cut:
        return False
    if weight_cut is not None and degree + 2 * h > weight_cut:
        return False
    return True


class PolySymbol(object):
    __slots__ = ('n', 'terms', 'deg_cut', 'h_cut', 'weight_cut', 'kind')

    def __init__(self, n, terms=None, deg_cut=None, h_cut=None,
                 weight_cut=None, kind=CoefficientKind.RATIONAL):
        if n < 1:
            raise DimensionMismatch('A symbol needs at least one degree of freedom')
        kind = CoefficientKind(kind)
        clean = {}
        for key, value in (terms or {}).items():
            monomial = _as_monomial(n, key)
            if not _within(monomial.degree, monomial.h, deg_cut, h_cut, weight_cut):
                continue
            value = kind.convert(value)
            if monomial in clean:
                value = clean[monomial] + value
            clean[monomial] = value
        self.n = n
        self.terms = dict((m, c) for m, c in clean.items() if c)
        self.deg_cut = deg_cut
        self.h_cut = h_cut
        self.weight_cut = weight_cut
        self.kind = kind

    @classmethod
    def _build(cls, n, terms, deg_cut, h_cut, weight_cut, kind):
        # terms are already converted and within the cuts
        obj = object.__new__(cls)
        obj.n = n
        obj.terms = dict((m, c) for m, c in terms.items() if c)
        obj.deg_cut = deg_cut
        obj.h_cut = h_cut
        obj.weight_cut = weight_cut
        obj.kind = kind
        return obj

    def _like(self, terms, deg_cut=None, h_cut=None, weight_cut=None, kind=None):
        return PolySymbol._build(
            self.n,
            terms,
            self.deg_cut if deg_cut is None else deg_cut,
            self.h_cut if h_cut is None else h_cut,
            self.weight_cut if weight_cut is None else weight_cut,
            kind or self.kind,
        )

    # constructors

    @classmethod
    def zero(cls, n, kind=CoefficientKind.RATIONAL, **cuts):
        return cls(n, {}, kind=kind, **cuts)

    @classmethod
    def constant(cls, n, value, kind=CoefficientKind.RATIONAL, **cuts):
        return cls(n, {Monomial((0,) * (2 * n), 0): value}, kind=kind, **cuts)

    @classmethod
    def monomial(cls, n, exps, h=0, coeff=1, kind=CoefficientKind.RATIONAL, **cuts):
        return cls(n, {Monomial(tuple(exps), h): coeff}, kind=kind, **cuts)

    @classmethod
    def variable(cls, n, index, kind=CoefficientKind.RATIONAL, **cuts):
        """Coordinate z_index with z = (x_1..x_n, xi_1..xi_n)."""
        if not 0 <= index < 2 * n:
            raise DimensionMismatch('No variable %d in dimension %d' % (index, n))
        exps = [0] * (2 * n)
        exps[index] = 1
        return cls.monomial(n, exps, kind=kind, **cuts)

    @classmethod
    def x(cls, n, j, kind=CoefficientKind.RATIONAL, **cuts):
        return cls.variable(n, j, kind=kind, **cuts)

    @classmethod
    def xi(cls, n, j, kind=CoefficientKind.RATIONAL, **cuts):
        return cls.variable(n, n + j, kind=kind, **cuts)

    @classmethod
    def hbar(cls, n, power=1, kind=CoefficientKind.RATIONAL, **cuts):
        return cls.monomial(n, (0,) * (2 * n), h=power, kind=kind, **cuts)

    @classmethod
    def from_terms(cls, n, entries, kind=CoefficientKind.RATIONAL, **cuts):
        """Build from (x_exp, xi_exp, h, coeff) tuples."""
        terms = {}
        kind = CoefficientKind(kind)
        for x_exp, xi_exp, h, coeff in entries:
            monomial = _as_monomial(n, (x_exp, xi_exp, h))
            value = kind.convert(coeff)
            terms[monomial] = terms[monomial] + value if monomial in terms else value
        return cls(n, terms, kind=kind, **cuts)

    # inspection

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        for monomial in self.sorted_monomials():
            yield monomial, self.terms[monomial]

    def sorted_monomials(self):
        return sorted(self.terms, key=Monomial.sort_key)

    def coefficient(self, x_exp, xi_exp, h=0):
        return self.terms.get(_as_monomial(self.n, (x_exp, xi_exp, h)), self.kind.zero)

    def constant_term(self):
        return self.terms.get(Monomial((0,) * (2 * self.n), 0), self.kind.zero)

    def degree(self):
        return max([m.degree for m in self.terms] or [-1])

    def min_degree(self):
        return min([m.degree for m in self.terms] or [-1])

    def min_weight(self):
        return min([m.weight for m in self.terms] or [-1])

    def max_h(self):
        return max([m.h for m in self.terms] or [-1])

    def graded_blocks(self):
        """Sorted (degree, hbar power) pairs with nonzero terms."""
        return sorted(set((m.degree, m.h) for m in self.terms))

    def max_abs(self):
        return max([self.kind.magnitude(c) for c in self.terms.values()] or [0.0])

    def cuts(self):
        return {
            'deg_cut': self.deg_cut,
            'h_cut': self.h_cut,
            'weight_cut': self.weight_cut,
        }

    def homogeneous_part(self, k, h=None):
        return self._like(dict(
            (m, c) for m, c in self.terms.items()
            if m.degree == k and (h is None or m.h == h)
        ))

    def hbar_coefficient(self, h):
        """Coefficient of hbar^h as an hbar-free symbol."""
        weight_cut = None if self.weight_cut is None else self.weight_cut - 2 * h
        return PolySymbol._build(
            self.n,
            dict((Monomial(m.exps, 0), c) for m, c in self.terms.items() if m.h == h),
            self.deg_cut,
            0,
            weight_cut,
            self.kind,
        )

    def times_hbar(self, power=1):
        h_cut = self.h_cut
        terms = dict(
            (Monomial(m.exps, m.h + power), c) for m, c in self.terms.items()
            if _within(m.degree, m.h + power, self.deg_cut, h_cut, self.weight_cut)
        )
        return self._like(terms)

    def principal(self):
        return self.hbar_coefficient(0)

    # cuts and kinds

    def truncate(self, deg_cut=None, h_cut=None, weight_cut=None):
        deg_cut = merge_cuts(self.deg_cut, deg_cut)
        h_cut = merge_cuts(self.h_cut, h_cut)
        weight_cut = merge_cuts(self.weight_cut, weight_cut)
        terms = dict(
            (m, c) for m, c in self.terms.items()
            if _within(m.degree, m.h, deg_cut, h_cut, weight_cut)
        )
        return PolySymbol._build(self.n, terms, deg_cut, h_cut, weight_cut, self.kind)

    def with_cuts(self, deg_cut=None, h_cut=None, weight_cut=None):
        """Replace the cuts, dropping terms beyond the new ones."""
        terms = dict(
            (m, c) for m, c in self.terms.items()
            if _within(m.degree, m.h, deg_cut, h_cut, weight_cut)
        )
        return PolySymbol._build(self.n, terms, deg_cut, h_cut, weight_cut, self.kind)

    def as_kind(self, kind):
        kind = CoefficientKind(kind)
        if kind is self.kind:
            return self
        terms = dict((m, kind.convert(c)) for m, c in self.terms.items())
        return self._like(terms, kind=kind)

    def realified(self):
        """Demote to the real kind when every imaginary part vanishes."""
        if not self.kind.is_complex:
            return self
        if any(self.kind.imag_part(c) for c in self.terms.values()):
            return self
        real = self.kind.realified()
        return self._like(
            dict((m, self.kind.real_part(c)) for m, c in self.terms.items()),
            kind=real,
        )

    def is_real(self):
        return not self.kind.is_complex or not any(
            self.kind.imag_part(c) for c in self.terms.values()
        )

    def real_part(self):
        real = self.kind.realified()
        return self._like(
            dict((m, self.kind.real_part(c)) for m, c in self.terms.items()),
            kind=real,
        )

    def imag_part(self):
        real = self.kind.realified()
        return self._like(
            dict((m, self.kind.imag_part(c)) for m, c in self.terms.items()),
            kind=real,
        )

    def chop(self, tol):
        """Drop float coefficients not larger than tol."""
        if self.kind.is_exact:
            return self
        return self._like(dict(
            (m, c) for m, c in self.terms.items() if abs(c) > tol
        ))

    # arithmetic

    def _check_compatible(self, other):
        if self.n != other.n:
            raise DimensionMismatch(
                'Symbols in %d and %d degrees of freedom' % (self.n, other.n)
            )
        if self.kind is not other.kind:
            raise CoefficientKindMismatch(
                'Cannot combine %s and %s symbols'
                % (self.kind.value, other.kind.value)
            )

    def _operand(self, other):
        if isinstance(other, PolySymbol):
            self._check_compatible(other)
            return other
        return PolySymbol.constant(self.n, other, kind=self.kind)

    def _merged_cuts(self, other):
        return (
            merge_cuts(self.deg_cut, other.deg_cut),
            merge_cuts(self.h_cut, other.h_cut),
            merge_cuts(self.weight_cut, other.weight_cut),
        )

    def __add__(self, other):
        other = self._operand(other)
        deg_cut, h_cut, weight_cut = self._merged_cuts(other)
        terms = dict(
            (m, c) for m, c in self.terms.items()
            if _within(m.degree, m.h, deg_cut, h_cut, weight_cut)
        )
        for m, c in other.terms.items():
            if not _within(m.degree, m.h, deg_cut, h_cut, weight_cut):
                continue
            terms[m] = terms[m] + c if m in terms else c
        return PolySymbol._build(self.n, terms, deg_cut, h_cut, weight_cut, self.kind)

    __radd__ = __add__

    def __neg__(self):
        return self._like(dict((m, -c) for m, c in self.terms.items()))

    def __sub__(self, other):
        return self + (-self._operand(other))

    def __rsub__(self, other):
        return self._operand(other) + (-self)

    def scale(self, value):
        value = self.kind.convert(value)
        return self._like(dict((m, c * value) for m, c in self.terms.items()))

    def __mul__(self, other):
        if not isinstance(other, PolySymbol):
            return self.scale(other)
        self._check_compatible(other)
        deg_cut, h_cut, weight_cut = self._merged_cuts(other)
        terms = {}
        right = [(m.exps, m.h, m.degree, c) for m, c in other.terms.items()]
        for m1, c1 in self.terms.items():
            d1 = m1.degree
            for exps2, h2, d2, c2 in right:
                h = m1.h + h2
                if not _within(d1 + d2, h, deg_cut, h_cut, weight_cut):
                    continue
                key = Monomial(tuple(a + b for a, b in zip(m1.exps, exps2)), h)
                value = c1 * c2
                terms[key] = terms[key] + value if key in terms else value
        return PolySymbol._build(self.n, terms, deg_cut, h_cut, weight_cut, self.kind)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        value = self.kind.convert(other)
        if not value:
            raise ZeroDivisionError('Symbol divided by zero')
        return self.scale(self.kind.one / value)

    def __pow__(self, power):
        if power < 0:
            raise ValueError('Symbols have no negative powers')
        result = PolySymbol.constant(self.n, 1, kind=self.kind, **self.cuts())
        base = self
        while power:
            if power & 1:
                result = result * base
            power >>= 1
            if power:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, PolySymbol):
            return (
                self.n == other.n
                and self.kind is other.kind
                and self.terms == other.terms
            )
        if isinstance(other, (numbers.Number, Fraction)) or QQ.of_type(other):
            try:
                return self == PolySymbol.constant(self.n, other, kind=self.kind)
            except CoefficientKindMismatch:
                return False
        return NotImplemented

    __hash__ = None

    # calculus and evaluation

    def derivative(self, index):
        """Partial derivative in z_index, z = (x_1..x_n, xi_1..xi_n)."""
        if not 0 <= index < 2 * self.n:
            raise DimensionMismatch('No variable %d in dimension %d' % (index, self.n))
        terms = {}
        for m, c in self.terms.items():
            e = m.exps[index]
            if not e:
                continue
            exps = m.exps[:index] + (e - 1,) + m.exps[index + 1:]
            terms[Monomial(exps, m.h)] = c * self.kind.convert(e)
        return self._like(terms)

    def evaluate(self, point, hval=0):
        """
        Value of the truncated series at a phase-space point

        Arguments:
        point <list> -- 2n coordinates (x_1..x_n, xi_1..xi_n)
        hval <number> -- Value substituted for hbar
        """
        if len(point) != 2 * self.n:
            raise DimensionMismatch(
                'Point has %d coordinates, expected %d' % (len(point), 2 * self.n)
            )
        values = list(point) + [hval]
        kind = self.kind
        if kind.is_exact:
            try:
                values = [kind.convert(v) for v in values]
            except CoefficientKindMismatch:
                kind = kind.floated()
                if any(isinstance(v, complex) for v in values):
                    kind = kind.complexified()
                values = [kind.convert(v) for v in values]
        else:
            if any(isinstance(v, complex) for v in values):
                kind = kind.complexified()
            values = [kind.convert(v) for v in values]
        total = kind.zero
        for m, c in self.terms.items():
            term = kind.convert(c)
            for v, e in zip(values, m.exps + (m.h,)):
                if e:
                    term = term * v ** e
            total = total + term
        return total

    def substitute_linear(self, matrix):
        return substitute_linear(self, matrix)

    def translate(self, point):
        """p(z + point); only meaningful up to the cuts of p."""
        if len(point) != 2 * self.n:
            raise DimensionMismatch('Base point must have %d coordinates' % (2 * self.n))
        images = []
        for index, value in enumerate(point):
            image = PolySymbol.variable(self.n, index, kind=self.kind)
            images.append(image + self.kind.convert(value))
        return compose(self, images)

    # serialization

    def terms_to_json(self):
        result = []
        for m, c in self:
            result.append({
                'x': list(m.x_exp),
                'xi': list(m.xi_exp),
                'h': m.h,
                'coeff': self.kind.to_json(c),
            })
        return result

    def to_json(self):
        data = {
            'n': self.n,
            'deg_cut': self.deg_cut,
            'h_cut': self.h_cut,
            'mode': self.kind.value,
            'terms': self.terms_to_json(),
        }
        if self.weight_cut is not None:
            data['weight_cut'] = self.weight_cut
        return data

    @classmethod
    def from_terms_json(cls, n, entries, kind, deg_cut=None, h_cut=None,
                        weight_cut=None):
        terms = {}
        for entry in entries:
            try:
                monomial = _as_monomial(n, (entry['x'], entry['xi'], entry.get('h', 0)))
                value = parse_coefficient(entry['coeff'], kind)
            except (KeyError, TypeError) as e:
                raise ParseError('Malformed term %r: %s' % (entry, e))
            terms[monomial] = terms[monomial] + value if monomial in terms else value
        return cls(n, terms, deg_cut=deg_cut, h_cut=h_cut,
                   weight_cut=weight_cut, kind=kind)

    @classmethod
    def from_json(cls, data, kind=None):
        try:
            n = int(data['n'])
            entries = data['terms']
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError('Malformed symbol: %s' % e)
        if kind is None:
            kind = CoefficientKind(data['mode']) if 'mode' in data else infer_kind(
                [entry.get('coeff') for entry in entries]
            )
        return cls.from_terms_json(
            n, entries, kind,
            deg_cut=data.get('deg_cut'),
            h_cut=data.get('h_cut'),
            weight_cut=data.get('weight_cut'),
        )

    def __repr__(self):
        return 'PolySymbol(n=%d, %s)' % (self.n, self)

    def __str__(self):
        if not self.terms:
            return '0'
        parts = []
        for m, c in self:
            factors = []
            for j, e in enumerate(m.x_exp):
                if e:
                    factors.append('x%d' % (j + 1) + ('^%d' % e if e > 1 else ''))
            for j, e in enumerate(m.xi_exp):
                if e:
                    factors.append('xi%d' % (j + 1) + ('^%d' % e if e > 1 else ''))
            if m.h:
                factors.append('h' + ('^%d' % m.h if m.h > 1 else ''))
            parts.append('*'.join(['(%s)' % (c,)] + factors))
        return ' + '.join(parts)


@functools.lru_cache(maxsize=None)
def monomial_basis(n, k):
    """
    Exponent tuples of the degree-k monomials in 2n variables

    Graded lexicographic: x-block before xi-block, larger leading exponents
    first.
    """
    return tuple(_compositions(k, 2 * n))


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@functools.lru_cache(maxsize=None)
def monomial_index(n, k):
    return dict((exps, i) for i, exps in enumerate(monomial_basis(n, k)))


class GradedComponent(namedtuple('GradedComponent', ['n', 'k', 'h', 'coeffs', 'kind'])):
    """Coefficients of the degree-k, hbar^h part in monomial_basis(n, k)."""
    __slots__ = ()

    @property
    def basis(self):
        return monomial_basis(self.n, self.k)

    def is_zero(self):
        return not any(self.coeffs)

    def to_symbol(self, **cuts):
        terms = dict(
            (Monomial(exps, self.h), c)
            for exps, c in zip(self.basis, self.coeffs)
        )
        return PolySymbol(self.n, terms, kind=self.kind, **cuts)


def grade_component(p, k, h=0):
    if k < 0 or h < 0:
        raise TruncationError('Negative degree %d or hbar power %d' % (k, h))
    if p.deg_cut is not None and k > p.deg_cut:
        raise TruncationError('Degree %d beyond deg_cut %d' % (k, p.deg_cut))
    if p.h_cut is not None and h > p.h_cut:
        raise TruncationError('hbar power %d beyond h_cut %d' % (h, p.h_cut))
    zero = p.kind.zero
    coeffs = tuple(
        p.terms.get(Monomial(exps, h), zero) for exps in monomial_basis(p.n, k)
    )
    return GradedComponent(p.n, k, h, coeffs, p.kind)


def graded_decomposition(p):
    return [grade_component(p, k, h) for k, h in p.graded_blocks()]


def matrix_rows(matrix):
    """Nested lists from numpy arrays, sympy matrices or sequences."""
    if hasattr(matrix, 'tolist'):
        return matrix.tolist()
    return [list(row) for row in matrix]


def compose(p, images):
    """
    Substitute symbols for the variables of p

    Arguments:
    p <PolySymbol> -- Symbol to transform
    images <list> -- 2n PolySymbols replacing z_1..z_2n
    """
    if len(images) != 2 * p.n:
        raise DimensionMismatch(
            'Need %d images, got %d' % (2 * p.n, len(images))
        )
    cuts = p.cuts()
    images = [image.truncate(**cuts) for image in images]
    powers = [[PolySymbol.constant(images[0].n, 1, kind=p.kind, **cuts)] for _ in images]
    result = PolySymbol.zero(images[0].n, kind=p.kind, **cuts)
    for m, c in p:
        term = PolySymbol.monomial(images[0].n, (0,) * (2 * images[0].n), h=m.h,
                                   coeff=c, kind=p.kind, **cuts)
        for index, e in enumerate(m.exps):
            if not e:
                continue
            cache = powers[index]
            while len(cache) <= e:
                cache.append(cache[-1] * images[index])
            term = term * cache[e]
        result = result + term
    return result


def substitute_linear(p, matrix):
    """
    Return p o S, each variable replaced by its row of S

    Arguments:
    p <PolySymbol> -- Symbol in (x_1..x_n, xi_1..xi_n)
    matrix <2n x 2n> -- Linear map z = S w, as nested lists, numpy or sympy
    """
    rows = matrix_rows(matrix)
    size = 2 * p.n
    if len(rows) != size or any(len(row) != size for row in rows):
        raise DimensionMismatch('Frame must be %dx%d' % (size, size))
    images = []
    for row in rows:
        terms = {}
        for index, value in enumerate(row):
            value = p.kind.convert(value)
            if value:
                exps = [0] * size
                exps[index] = 1
                terms[Monomial(tuple(exps), 0)] = value
        images.append(PolySymbol._build(p.n, terms, None, None, None, p.kind))
    return compose(p, images)
