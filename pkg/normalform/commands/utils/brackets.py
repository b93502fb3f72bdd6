"""
Poisson bracket, Weyl star product and Moyal bracket on PolySymbols.

Sign convention, fixed for the whole package:

    {f, g} = sum_j  d_xi_j f * d_x_j g  -  d_x_j f * d_xi_j g

so that {xi, x} = 1 and {xi^2, g} = 2 xi d_x g. The star product is the Weyl
composition with the commutator x * xi - xi * x = i hbar, which is the symbol
of [x, (hbar/i) d_x].
"""
import functools
import itertools
import logging
from math import factorial

from sympy import QQ
from sympy import QQ_I

from normalform.commands.utils.errors import DimensionMismatch
from normalform.commands.utils.errors import InvalidGenerator
from normalform.commands.utils.errors import TruncationError
from normalform.commands.utils.polynomial import CoefficientKind
from normalform.commands.utils.polynomial import Monomial
from normalform.commands.utils.polynomial import PolySymbol
from normalform.commands.utils.polynomial import merge_cuts

logger = logging.getLogger(__name__)

CONVENTION = '{f,g} = sum_j d_xi_j f d_x_j g - d_x_j f d_xi_j g; Weyl star product'

# (-i)^K for K mod 4
_UNITS = ((1, 0), (0, -1), (-1, 0), (0, 1))


def promote(*symbols):
    """Bring symbols to one dimension and one coefficient kind."""
    dims = set(s.n for s in symbols)
    if len(dims) > 1:
        raise DimensionMismatch('Symbols in %s degrees of freedom' % sorted(dims))
    kind = CoefficientKind.common(*[s.kind for s in symbols])
    return [s.as_kind(kind) for s in symbols]


def _cuts(a, b):
    return (
        merge_cuts(a.deg_cut, b.deg_cut),
        merge_cuts(a.h_cut, b.h_cut),
        merge_cuts(a.weight_cut, b.weight_cut),
    )


def _fits(degree, h, deg_cut, h_cut, weight_cut):
    return (
        (deg_cut is None or degree <= deg_cut)
        and (h_cut is None or h <= h_cut)
        and (weight_cut is None or degree + 2 * h <= weight_cut)
    )


def poisson(a, b):
    """Poisson bracket {a, b}, truncated to the operands' cuts."""
    a, b = promote(a, b)
    n = a.n
    deg_cut, h_cut, weight_cut = _cuts(a, b)
    kind = a.kind
    terms = {}
    right = list(b.terms.items())
    for m1, c1 in a.terms.items():
        e1 = m1.exps
        d1 = m1.degree
        for m2, c2 in right:
            e2 = m2.exps
            h = m1.h + m2.h
            if not _fits(d1 + m2.degree - 2, h, deg_cut, h_cut, weight_cut):
                continue
            product = None
            for j in range(n):
                weight = e1[n + j] * e2[j] - e1[j] * e2[n + j]
                if not weight:
                    continue
                if product is None:
                    product = c1 * c2
                exps = list(e1[k] + e2[k] for k in range(2 * n))
                exps[j] -= 1
                exps[n + j] -= 1
                key = Monomial(tuple(exps), h)
                value = product * kind.convert(weight)
                terms[key] = terms[key] + value if key in terms else value
    return PolySymbol._build(n, terms, deg_cut, h_cut, weight_cut, kind)


def _falling(value, order):
    result = 1
    for i in range(order):
        result *= value - i
    return result


@functools.lru_cache(maxsize=None)
def _star_1d(a, b, c, d):
    """
    One-dimensional factors of x^a xi^b * x^c xi^d

    Each entry is (x exponent, xi exponent, order, coefficient) where the
    coefficient already carries 1 / 2^order; the remaining factor of the
    product is (-i hbar)^order.
    """
    entries = []
    for mu in range(min(b, c) + 1):
        for nu in range(min(a, d) + 1):
            numerator = (
                _falling(b, mu) * _falling(a, nu)
                * _falling(c, mu) * _falling(d, nu)
            )
            if not numerator:
                continue
            if nu % 2:
                numerator = -numerator
            denominator = factorial(mu) * factorial(nu) * 2 ** (mu + nu)
            entries.append(
                (a + c - mu - nu, b + d - mu - nu, mu + nu, QQ(numerator, denominator))
            )
    return tuple(entries)


def _expansion(m1, m2, n, max_order):
    """Yield (exps, order, rational coefficient) of the bidifferential expansion."""
    factors = []
    for j in range(n):
        entries = _star_1d(m1.exps[j], m1.exps[n + j], m2.exps[j], m2.exps[n + j])
        if max_order is not None:
            entries = [e for e in entries if e[2] <= max_order]
        factors.append(entries)
    for combination in itertools.product(*factors):
        order = 0
        coeff = QQ.one
        for entry in combination:
            order += entry[2]
            coeff *= entry[3]
        if max_order is not None and order > max_order:
            continue
        exps = tuple(e[0] for e in combination) + tuple(e[1] for e in combination)
        yield exps, order, coeff


def moyal_star(a, b):
    """Weyl composition a * b; the result has complex coefficients."""
    a, b = promote(a, b)
    n = a.n
    deg_cut, h_cut, weight_cut = _cuts(a, b)
    kind = a.kind.complexified()
    a = a.as_kind(kind)
    b = b.as_kind(kind)
    if kind.is_exact:
        units = [QQ_I(*u) for u in _UNITS]
    else:
        units = [complex(*u) for u in _UNITS]
    terms = {}
    right = list(b.terms.items())
    for m1, c1 in a.terms.items():
        for m2, c2 in right:
            h0 = m1.h + m2.h
            if weight_cut is not None and m1.weight + m2.weight > weight_cut:
                continue
            max_order = None if h_cut is None else h_cut - h0
            if max_order is not None and max_order < 0:
                continue
            product = c1 * c2
            for exps, order, coeff in _expansion(m1, m2, n, max_order):
                degree = sum(exps)
                if deg_cut is not None and degree > deg_cut:
                    continue
                key = Monomial(exps, h0 + order)
                value = product * units[order % 4] * kind.convert(coeff)
                terms[key] = terms[key] + value if key in terms else value
    return PolySymbol._build(n, terms, deg_cut, h_cut, weight_cut, kind)


def moyal_bracket(a, b):
    """
    (i / hbar)(a * b - b * a)

    Real for real operands; only odd expansion orders survive, so the
    hbar^0 part is the Poisson bracket and corrections come in even powers.
    """
    a, b = promote(a, b)
    n = a.n
    deg_cut, h_cut, weight_cut = _cuts(a, b)
    kind = a.kind
    terms = {}
    right = list(b.terms.items())
    for m1, c1 in a.terms.items():
        for m2, c2 in right:
            h0 = m1.h + m2.h
            if weight_cut is not None and m1.weight + m2.weight - 2 > weight_cut:
                continue
            max_order = None if h_cut is None else h_cut - h0 + 1
            if max_order is not None and max_order < 1:
                continue
            product = c1 * c2
            for exps, order, coeff in _expansion(m1, m2, n, max_order):
                if not order % 2:
                    continue
                degree = sum(exps)
                if deg_cut is not None and degree > deg_cut:
                    continue
                sign = -2 if (order // 2) % 2 else 2
                key = Monomial(exps, h0 + order - 1)
                value = product * kind.convert(coeff * sign)
                terms[key] = terms[key] + value if key in terms else value
    return PolySymbol._build(n, terms, deg_cut, h_cut, weight_cut, kind)


def lie_transform(f, a, N=None):
    """
    exp(ad_a) f = f + {a, f} + {a, {a, f}} / 2 + ... up to degree N

    Arguments:
    f <PolySymbol> -- Symbol to transform
    a <PolySymbol> -- Generator without terms of degree below 3
    N <int> -- Degree cut of the result, defaults to the cut of f
    """
    if a and a.min_degree() < 3:
        raise InvalidGenerator(
            'Generator has terms of degree %d; flows need degree >= 3'
            % a.min_degree()
        )
    N = merge_cuts(f.deg_cut, N)
    if N is None:
        raise TruncationError('lie_transform needs a finite degree cut')
    f, a = promote(f, a)
    f = f.truncate(deg_cut=N)
    a = a.with_cuts(**f.cuts())
    if not a:
        return f
    result = f
    term = f
    order = 0
    while term:
        order += 1
        term = poisson(a, term).truncate(deg_cut=N) / order
        result = result + term
    return result


def _weight_bound(p):
    bounds = [p.weight_cut]
    if p.deg_cut is not None and p.h_cut is not None:
        bounds.append(p.deg_cut + 2 * p.h_cut)
    return merge_cuts(*bounds)


def moyal_transform(p, a):
    """
    exp(mad_a) p with mad_a = moyal_bracket(a, .)

    Symbol of exp(-iA/hbar) P exp(iA/hbar). Every non-constant term of a
    must have weight at least 3 so that each application raises the weight.
    """
    bound = _weight_bound(p)
    if bound is None:
        raise TruncationError('moyal_transform needs finite degree and hbar cuts')
    low = [m for m in a.terms if m.weight <= 2 and m.degree > 0]
    if low:
        raise InvalidGenerator(
            'Generator has a non-constant term of weight %d' % min(m.weight for m in low)
        )
    p, a = promote(p, a)
    a = a.with_cuts(**p.cuts())
    if not a:
        return p
    result = p
    term = p
    for order in range(1, bound + 2):
        term = moyal_bracket(a, term) / order
        if not term:
            break
        result = result + term
    return result


def star_conjugate(p, c, level, N_h):
    """
    Symbol of (1 + i hbar^level C)^-1 P (1 + i hbar^level C)

    The inverse is the geometric star series, truncated at hbar^N_h; the
    leading change is hbar^(level + 1) * moyal_bracket(p, c).
    """
    if level < 1:
        raise ValueError('Conjugation level must be at least 1')
    if N_h < level:
        raise TruncationError(
            'hbar cut %d is below the conjugation level %d' % (N_h, level)
        )
    if not c:
        return p
    p, c = promote(p, c)
    cuts = dict(deg_cut=p.deg_cut, h_cut=merge_cuts(p.h_cut, N_h),
                weight_cut=p.weight_cut)
    kind = p.kind.complexified()
    x = c.as_kind(kind).times_hbar(level).scale(kind.imaginary_unit).truncate(**cuts)
    one = PolySymbol.constant(p.n, 1, kind=kind, **cuts)
    inverse = one
    power = one
    for _ in range(N_h // level):
        power = -moyal_star(power, x)
        if not power:
            break
        inverse = inverse + power
    result = moyal_star(moyal_star(inverse, p.as_kind(kind).truncate(**cuts)), one + x)
    return result.truncate(**cuts).realified()
