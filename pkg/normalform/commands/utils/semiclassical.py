"""
Semiclassical normal form of a family of commuting Weyl symbols.

After the classical normal form of the principal parts has been lifted to
Moyal conjugations, each hbar order is normalized in turn so that

    P_j = sum_k Mh_jk (q_k - alpha_k)        (products taken with the star)

up to the weight cut W = N + 2 N_h, with Mh(q, hbar) in the commutant and
alpha(hbar) a vector of constants. alpha at first order does not depend on
any choice made on the way; higher orders depend on the gauge.
"""
import itertools
import logging
from collections import namedtuple

import numpy

from normalform.commands.utils.brackets import moyal_bracket
from normalform.commands.utils.brackets import moyal_star
from normalform.commands.utils.brackets import moyal_transform
from normalform.commands.utils.brackets import poisson
from normalform.commands.utils.brackets import promote
from normalform.commands.utils.brackets import star_conjugate
from normalform.commands.utils.certificates import CertificateReport
from normalform.commands.utils.certificates import first_block
from normalform.commands.utils.classical import classical_normal_form
from normalform.commands.utils.classical import commutation_defects
from normalform.commands.utils.classical import taylor_division
from normalform.commands.utils.commutant import CommutantPolynomial
from normalform.commands.utils.commutant import commutant_matrix_constant
from normalform.commands.utils.commutant import jacobian
from normalform.commands.utils.commutant import matrix_inverse
from normalform.commands.utils.errors import CommutationViolated
from normalform.commands.utils.errors import TruncationError
from normalform.commands.utils.errors import VerificationFailed
from normalform.commands.utils.homological import TOL_BRACKET
from normalform.commands.utils.homological import HomologicalSolver
from normalform.commands.utils.homological import q_exponents
from normalform.commands.utils.homological import to_commutant
from normalform.commands.utils.linalg import invert
from normalform.commands.utils.polynomial import CoefficientKind
from normalform.commands.utils.polynomial import PolySymbol
from normalform.commands.utils.polynomial import substitute_linear

logger = logging.getLogger(__name__)

LINEAR = 'linear'
EXPONENTIAL = 'exponential'
GAUGES = (LINEAR, EXPONENTIAL)


class Conjugator(namedtuple('Conjugator', ['level', 'gauge', 'c'])):
    """
    Conjugation normalizing one hbar order

    'exponential' applies exp(mad(-hbar^level c)); 'linear' conjugates by
    1 + i hbar^(level - 1) C and is only used from the second order on.
    """
    __slots__ = ()

    def apply(self, symbol, N_h):
        cuts = symbol.cuts()
        c = self.c.with_cuts(**cuts)
        if self.gauge == EXPONENTIAL:
            return moyal_transform(symbol, -c.times_hbar(self.level))
        return star_conjugate(symbol, c, self.level - 1, N_h)

    def to_json(self):
        return {'level': self.level, 'gauge': self.gauge, 'c': self.c.terms_to_json()}


class SemiclassicalNF(namedtuple('SemiclassicalNF', [
        'classical', 'basis', 'frame', 'generators', 'conjugators', 'Mh', 'Mh_symbols',
        'alpha', 'N', 'N_h', 'W', 'gauge', 'kind', 'normalized', 'unitary', 'alpha_real'])):
    """
    Result of the hbar iteration

    Mh is a matrix of commutant polynomials in (q, hbar), Mh_symbols its
    expansion in the basis; alpha lists constant series in hbar.
    """
    __slots__ = ()

    @property
    def cuts(self):
        return dict(deg_cut=self.W, h_cut=self.N_h, weight_cut=self.W)

    @property
    def alpha_levels(self):
        """alpha_levels[l - 1][k] is the coefficient of hbar^l in alpha_k."""
        return [
            [a.hbar_coefficient(level).constant_term() for a in self.alpha]
            for level in range(1, self.N_h + 1)
        ]

    def alpha_levels_json(self):
        return [
            [a.kind.to_json(a.hbar_coefficient(level).constant_term()) for a in self.alpha]
            for level in range(1, self.N_h + 1)
        ]


def _scale(symbols):
    return max([1.0] + [s.max_abs() for s in symbols])


def _clean(symbol, scale):
    """Chop float noise and drop imaginary parts that vanish."""
    if symbol.kind.is_exact:
        return symbol.realified()
    symbol = symbol.chop(TOL_BRACKET * scale)
    if symbol.kind.is_complex and symbol.imag_part().chop(TOL_BRACKET * scale).is_zero():
        return symbol.real_part()
    return symbol


def _at_level(poly, level, h_cut, weight_cut):
    """An hbar-free commutant polynomial moved to hbar^level."""
    terms = dict(((gamma, h + level), v) for (gamma, h), v in poly.terms.items())
    return CommutantPolynomial(poly.n, terms, kind=poly.kind, h_cut=h_cut,
                               weight_cut=weight_cut)


def alpha_first_order(M0, r0, kind=CoefficientKind.RATIONAL):
    """
    alpha at first order: -M0^-1 r(0)

    Arguments:
    M0 <list> -- Value at zero of the classical matrix M
    r0 <list> -- Constant terms of the hbar^1 parts in normal coordinates
    """
    inverse = invert([[kind.convert(v) for v in row] for row in M0], kind)
    return [-sum((row[k] * kind.convert(r0[k]) for k in range(len(r0))), kind.zero)
            for row in inverse]


def _sum(symbols):
    symbols = promote(*symbols)
    total = symbols[0]
    for s in symbols[1:]:
        total = total + s
    return total


def hbar_target(Mh_symbols, alpha, basis, cuts):
    """Symbols sum_k Mh_jk * (q_k - alpha_k) truncated to the cuts."""
    shifted = []
    for q, a in zip(basis, alpha):
        q, shift = promote(q.with_cuts(**cuts), a.expand(basis, **cuts))
        shifted.append(q - shift)
    return [
        _sum([moyal_star(entry.with_cuts(**cuts), factor) for entry, factor in zip(row, shifted)])
        for row in Mh_symbols
    ]


def _combine(rows, vectors, basis, deg_cut):
    """sum_k rows_jk(q) * vectors_k as phase-space symbols."""
    result = []
    for row in rows:
        terms = []
        for entry, vector in zip(row, vectors):
            symbol, vector = promote(entry.expand(basis, deg_cut=deg_cut), vector)
            terms.append((symbol * vector).truncate(deg_cut=deg_cut))
        result.append(_sum(terms))
    return result


def _random_commutant(rng, n, max_q_degree, kind):
    terms = {}
    for d in range(1, max_q_degree + 1):
        for gamma in q_exponents(n, d):
            value = int(rng.integers(-2, 3))
            if value:
                terms[(gamma, 0)] = value
    return CommutantPolynomial(n, terms).as_kind(kind)


def _lift(system, nf, cuts):
    symbols = [substitute_linear(s.with_cuts(**cuts), nf.frame) for s in system.symbols]
    for a in nf.generators:
        symbols = [moyal_transform(s, a.with_cuts(**cuts)) for s in symbols]
    return symbols


def semiclassical_normal_form(system, N, N_h, gauge=LINEAR, seed=0, base=None,
                              kernel_shift_seed=None):
    """
    Normal form of a system of Weyl symbols up to degree N and hbar^N_h

    Arguments:
    system <IntegrableSystem> -- Commuting symbols; needs deg_cut >= N + 2 N_h
    N <int> -- Degree cut of the classical part
    N_h <int> -- hbar order of the normal form
    gauge <str> -- 'linear' or 'exponential' conjugations after the first order
    seed <int> -- Seed of the generic combination in the classification
    base <int> -- Override of the lambda base of the homological solver
    kernel_shift_seed <int> -- Add seeded commutant elements to every
        conjugator, which only changes the gauge
    """
    if gauge not in GAUGES:
        raise ValueError('Unknown gauge %r, expected one of %s' % (gauge, list(GAUGES)))
    if N_h < 1:
        raise TruncationError('Semiclassical normal forms need N_h >= 1, got %d' % N_h)
    if system.h_cut < N_h:
        raise TruncationError('System is known up to hbar^%d only, asked for hbar^%d'
                              % (system.h_cut, N_h))
    W = N + 2 * N_h
    cuts = dict(deg_cut=W, h_cut=N_h, weight_cut=W)
    defects = commutation_defects([s.with_cuts(**cuts) for s in system.symbols], W, quantum=True)
    if defects:
        i, j, degree, h = defects[0]
        raise CommutationViolated((i, j), degree, h_order=h)
    nf = classical_normal_form(system, W, seed=seed, base=base)
    n = system.n
    kind = nf.kind
    basis = [q.with_cuts(**cuts) for q in nf.basis]
    symbols = _lift(system, nf, cuts)
    scale = _scale(symbols)
    symbols = [_clean(s, scale) for s in symbols]
    principal = [s.with_cuts(deg_cut=W, h_cut=0) for s in nf.normalized]
    J = jacobian(nf.F)
    J_inv = matrix_inverse(J, W)
    M0 = commutant_matrix_constant(nf.M)
    # classical entries carry h_cut 0; Mh needs room for every hbar level
    Mh = [[CommutantPolynomial(n, entry.terms, kind=entry.kind, h_cut=N_h, weight_cut=W - 2)
           for entry in row] for row in nf.M]
    alpha = [CommutantPolynomial.zero(n, kind=kind, h_cut=N_h, weight_cut=W) for _ in range(n)]
    conjugators = []
    solver = HomologicalSolver(basis, W, base=base)
    rng = numpy.random.default_rng(kernel_shift_seed) if kernel_shift_seed is not None else None
    for level in range(1, N_h + 1):
        D = W - 2 * level
        Mh_symbols = [[entry.expand(basis, **cuts) for entry in row] for row in Mh]
        target = hbar_target(Mh_symbols, alpha, basis, cuts)
        R = []
        for s, t in zip(symbols, target):
            s, t = promote(s, t)
            R.append(_clean((s - t).hbar_coefficient(level).with_cuts(deg_cut=D, h_cut=0), scale))
        R = promote(*R)
        for j, k in itertools.combinations(range(n), 2):
            defect = (poisson(principal[j], R[k]) - poisson(principal[k], R[j]))
            defect = _clean(defect.truncate(deg_cut=D), scale ** 2)
            if defect:
                raise CommutationViolated((j, k), first_block(defect)[0], h_order=level)
        g = [-v for v in _combine(J_inv, R, basis, D)]
        solution = solver.solve(g, D)
        c = _clean(solution.f, scale)
        F_tilde = [to_commutant(_clean(F, scale), basis) for F in solution.F_list]
        F = []
        for row in J:
            total = CommutantPolynomial.zero(n, kind=kind)
            for entry, value in zip(row, F_tilde):
                total = total - entry * value
            F.append(total.truncate(weight_cut=D))
        value_kind = CoefficientKind.common(kind, *[f.kind for f in F])
        a = alpha_first_order(M0, [f.constant_term() for f in F], value_kind)
        for j in range(n):
            V = F[j]
            for k in range(n):
                V = V + nf.M[j][k].as_kind(value_kind).scale(a[k])
            _, m = taylor_division(V.truncate(weight_cut=D))
            for k in range(n):
                Mh[j][k] = Mh[j][k] + _at_level(m[k], level, N_h, W - 2)
            alpha[j] = alpha[j] + _at_level(
                CommutantPolynomial.constant(n, a[j], kind=value_kind), level, N_h, W)
        if rng is not None:
            shift = _random_commutant(rng, n, D // 2, c.kind).expand(basis, deg_cut=D)
            c, shift = promote(c, shift)
            c = c + shift
        used = EXPONENTIAL if level == 1 else gauge
        conjugator = Conjugator(level, used, c)
        symbols = [_clean(conjugator.apply(s, N_h), scale) for s in symbols]
        conjugators.append(conjugator)
        logger.debug('hbar^%d normalized, alpha = %s', level,
                     [value_kind.to_json(v) for v in a])
    Mh_symbols = [[entry.expand(basis, **cuts) for entry in row] for row in Mh]
    unitary = all(s.is_real() for s in system.symbols) and (gauge == EXPONENTIAL or N_h < 2)
    alpha_real = all(not a_.kind.is_complex or not any(
        a_.kind.imag_part(v) for v in a_.terms.values()) for a_ in alpha)
    logger.info('Semiclassical normal form up to degree %d, hbar^%d in the %s gauge',
                N, N_h, gauge)
    return SemiclassicalNF(
        nf, basis, nf.frame, nf.generators, conjugators, Mh, Mh_symbols, alpha,
        N, N_h, W, gauge, kind, symbols, unitary, alpha_real,
    )


def replay_semiclassical(nf, symbols):
    """The original symbols moved by the frame, the generators and the conjugators."""
    cuts = nf.cuts
    result = [substitute_linear(s.with_cuts(**cuts), nf.frame) for s in symbols]
    for a in nf.generators:
        result = [moyal_transform(s, a.with_cuts(**cuts)) for s in result]
    for conjugator in nf.conjugators:
        result = [conjugator.apply(s, nf.N_h) for s in result]
    return result


def verify_semiclassical_nf(nf, system):
    """
    Replay the whole conjugation on the original system

    Transformed symbols must equal sum_k Mh_jk * (q_k - alpha_k) up to the
    weight cut, and every entry of Mh must star-commute with the basis.
    """
    report = CertificateReport('semiclassical', nf.N, nf.N_h)
    cuts = nf.cuts
    symbols = replay_semiclassical(nf, system.symbols)
    scale = _scale(symbols)
    basis = [q.with_cuts(**cuts) for q in nf.basis]
    target = hbar_target(nf.Mh_symbols, nf.alpha, basis, cuts)
    for j, (s, t) in enumerate(zip(symbols, target)):
        s, t = promote(s, t)
        report.check('normal form', (j,), _clean((s - t).truncate(**cuts), scale))
    for j, row in enumerate(nf.Mh_symbols):
        for k, entry in enumerate(row):
            for l, q in enumerate(basis):
                bracket = moyal_bracket(entry.with_cuts(**cuts), q)
                report.check('commutant', (j, k, l), _clean(bracket, scale))
    logger.info(report.describe())
    return report


GaugeExperiment = namedtuple('GaugeExperiment', ['runs', 'alpha_first', 'higher_agree', 'report'])


def _negligible(value, kind, scale):
    if kind.is_exact:
        return not value
    return kind.magnitude(value) <= TOL_BRACKET * scale


def alpha_gauge_experiment(system, N, N_h, bases=None, gauges=GAUGES, shift_seeds=(None, 1),
                           seed=0):
    """
    Recompute alpha over lambda bases, gauges and kernel shifts

    The first-order alpha must agree across all runs, else VerificationFailed.
    Agreement of the higher orders is recorded per order.
    """
    W = N + 2 * N_h
    bases = bases or [None, W + 2]
    runs = []
    results = []
    for base, gauge, shift in itertools.product(bases, gauges, shift_seeds):
        results.append(semiclassical_normal_form(system, N, N_h, gauge=gauge, seed=seed,
                                                 base=base, kernel_shift_seed=shift))
        runs.append({'base': base, 'gauge': gauge, 'kernel_shift_seed': shift})
    report = CertificateReport('alpha-gauge', N, N_h)
    reference = results[0]
    scale = max([1.0] + [a.kind.magnitude(v) for a in reference.alpha for v in a.terms.values()])
    higher = dict((level, True) for level in range(2, N_h + 1))
    for index, nf in enumerate(results[1:], 1):
        for k, (expected, found) in enumerate(zip(reference.alpha, nf.alpha)):
            difference = found - expected
            for level in range(1, N_h + 1):
                value = difference.hbar_coefficient(level).constant_term()
                if _negligible(value, difference.kind, scale):
                    continue
                if level == 1:
                    residual = PolySymbol.monomial(system.n, (0,) * (2 * system.n), h=1,
                                                   coeff=value, kind=difference.kind)
                    report.check('alpha', (index, k), residual)
                else:
                    higher[level] = False
    if not report.ok:
        raise VerificationFailed(report)
    logger.info('First-order alpha agrees across %d runs; higher orders agree: %s',
                len(runs), higher)
    return GaugeExperiment(runs, reference.alpha_levels[0], higher, report)
