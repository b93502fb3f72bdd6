"""
Formal Birkhoff normal form of a commuting family at a nondegenerate
critical point.

The family is brought to its standard frame, then for every degree k >= 3 a
homogeneous generator a_k is found whose time-1 flow moves the degree-k parts
into the commutant of the standard basis. After the last degree every symbol
is a polynomial F_i(q_1..q_n), and F = M q with M(0) = C invertible.
"""
import itertools
import logging
from collections import namedtuple
from fractions import Fraction

from normalform.commands.utils.brackets import lie_transform
from normalform.commands.utils.brackets import moyal_bracket
from normalform.commands.utils.brackets import poisson
from normalform.commands.utils.brackets import promote
from normalform.commands.utils.certificates import CertificateReport
from normalform.commands.utils.certificates import first_block
from normalform.commands.utils.commutant import CommutantPolynomial
from normalform.commands.utils.errors import CoefficientKindMismatch
from normalform.commands.utils.errors import CommutationViolated
from normalform.commands.utils.errors import DimensionMismatch
from normalform.commands.utils.errors import NotCartan
from normalform.commands.utils.errors import ParseError
from normalform.commands.utils.errors import TruncationError
from normalform.commands.utils.homological import TOL_BRACKET
from normalform.commands.utils.homological import HomologicalSolver
from normalform.commands.utils.homological import compatibility_defects
from normalform.commands.utils.homological import to_commutant
from normalform.commands.utils.linalg import invert
from normalform.commands.utils.polynomial import CoefficientKind
from normalform.commands.utils.polynomial import PolySymbol
from normalform.commands.utils.polynomial import infer_kind
from normalform.commands.utils.polynomial import substitute_linear
from normalform.commands.utils.symplectic import block_forms
from normalform.commands.utils.symplectic import certify_standard_basis
from normalform.commands.utils.symplectic import rational_block_frame
from normalform.commands.utils.symplectic import williamson_classify

logger = logging.getLogger(__name__)

RATIONALIZE_DENOMINATOR = 10 ** 6


class IntegrableSystem(object):
    """
    n commuting symbols centred at the critical point

    Arguments:
    symbols <list> -- PolySymbols of one dimension and kind
    deg_cut <int> -- Phase degree up to which the symbols are known, None if exact
    h_cut <int> -- hbar order up to which the symbols are known, 0 if classical
    constants <list> -- Values f_i(0) removed at ingestion
    """

    def __init__(self, symbols, deg_cut=None, h_cut=0, constants=None):
        if not symbols:
            raise DimensionMismatch('A system needs at least one symbol')
        symbols = promote(*symbols)
        self.n = symbols[0].n
        if len(symbols) != self.n:
            raise DimensionMismatch('%d symbols in %d degrees of freedom' % (len(symbols), self.n))
        self.deg_cut = deg_cut
        self.h_cut = h_cut
        self.symbols = [s.with_cuts(deg_cut=deg_cut, h_cut=h_cut) for s in symbols]
        self.kind = self.symbols[0].kind
        self.constants = constants or [self.kind.zero] * self.n

    @classmethod
    def from_symbols(cls, symbols, deg_cut=None, h_cut=0, base_point=None):
        """Recentre at base_point and drop the constant terms f_i(0)."""
        if base_point is not None:
            symbols = [s.translate(base_point) for s in symbols]
        constants = [s.constant_term() for s in symbols]
        cleaned = [s - c for s, c in zip(symbols, constants)]
        if any(constants):
            logger.warning('Dropped constant terms %s',
                           [s.kind.to_json(c) for s, c in zip(symbols, constants)])
        return cls(cleaned, deg_cut=deg_cut, h_cut=h_cut, constants=constants)

    @property
    def mode(self):
        return self.kind.value

    def principal(self):
        return IntegrableSystem(
            [s.hbar_coefficient(0) for s in self.symbols],
            deg_cut=self.deg_cut, h_cut=0, constants=self.constants,
        )

    def to_json(self):
        return {
            'n': self.n,
            'deg_cut': self.deg_cut,
            'h_cut': self.h_cut,
            'mode': self.mode,
            'symbols': [s.terms_to_json() for s in self.symbols],
        }

    @classmethod
    def from_json(cls, data, mode=None):
        """
        Read a system document

        Arguments:
        data <dict> -- {"n", "deg_cut", "h_cut", "mode", "base_point", "symbols"}
        mode <str> -- Coefficient kind overriding the document's mode
        """
        try:
            n = int(data['n'])
            entries = data['symbols']
            deg_cut = data.get('deg_cut')
            h_cut = int(data.get('h_cut') or 0)
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError('Malformed system: %s' % e)
        if not isinstance(entries, list) or len(entries) != n:
            raise ParseError('System of dimension %d needs %d symbols' % (n, n))
        mode = mode or data.get('mode')
        try:
            kind = infer_kind([t.get('coeff') for terms in entries for t in terms])
            if mode:
                requested = CoefficientKind(mode)
                kind = requested.complexified() if kind.is_complex else requested
        except (ValueError, AttributeError) as e:
            raise ParseError('Unknown coefficient mode: %s' % e)
        symbols = [PolySymbol.from_terms_json(n, terms, kind) for terms in entries]
        return cls.from_symbols(symbols, deg_cut=deg_cut, h_cut=h_cut,
                                base_point=data.get('base_point'))


def _scale(symbols):
    return max([1.0] + [s.max_abs() for s in symbols])


def _clean(symbol, scale):
    if symbol.kind.is_exact:
        return symbol
    return symbol.chop(TOL_BRACKET * scale)


def commutation_defects(symbols, weight_cut, quantum=False):
    """
    (i, j, degree, hbar power) of every non-commuting pair

    Brackets are compared up to the weight cut, where they are exact once
    every symbol starts at weight 2.
    """
    bracket = moyal_bracket if quantum else poisson
    symbols = [s.truncate(weight_cut=weight_cut) for s in symbols]
    scale = _scale(symbols)
    defects = []
    for i, j in itertools.combinations(range(len(symbols)), 2):
        value = _clean(bracket(symbols[i], symbols[j]), scale ** 2)
        if value:
            degree, h = first_block(value)
            defects.append((i, j, degree, h))
    return defects


def ensure_critical(symbols):
    for i, s in enumerate(symbols):
        linear = s.principal().homogeneous_part(1)
        if linear:
            raise NotCartan('not critical', 'Symbol %d has a nonzero differential at 0' % i)


StandardFrame = namedtuple('StandardFrame', ['classification', 'matrix', 'basis', 'C', 'kind'])


def _rationalize(value):
    return Fraction(float(value)).limit_denominator(RATIONALIZE_DENOMINATOR)


def standard_frame(quadratics, kind, seed=0):
    """
    Frame and standard basis for the quadratic parts

    Exact kinds never use the floating Williamson frame: the recombination C
    is rationalized, the standard basis C^-1 h is certified exactly and an
    exact block frame replaces S.
    """
    classification = williamson_classify(quadratics, seed=seed)
    cartan = classification.cartan
    n = cartan.n
    if not kind.is_exact:
        return StandardFrame(
            classification, classification.S.tolist(), classification.models,
            classification.C.tolist(), CoefficientKind.FLOAT,
        )
    rational = CoefficientKind.RATIONAL
    C = [[rational.convert(_rationalize(v)) for v in row] for row in classification.C]
    C_inv = invert(C, rational)
    basis = []
    for j in range(n):
        total = PolySymbol.zero(n)
        for i in range(n):
            total = total + quadratics[i].as_kind(rational).scale(C_inv[j][i])
        basis.append(total)
    certify_standard_basis(basis, cartan)
    T = rational_block_frame(basis, cartan)
    return StandardFrame(classification, T, block_forms(basis, T), C, rational)


def taylor_division(g, q_list=None):
    """
    g = g(0) + sum_j coeffs_j q_j, dividing each monomial by its first q

    Arguments:
    g <CommutantPolynomial|PolySymbol> -- Element of the commutant
    q_list <list> -- Standard basis, needed when g is a PolySymbol
    """
    if isinstance(g, PolySymbol):
        g = to_commutant(g, q_list)
    n = g.n
    g0 = g.kind.zero
    terms = [{} for _ in range(n)]
    for (gamma, h), value in g.terms.items():
        if not any(gamma):
            if h:
                raise ValueError('Constant term at hbar^%d has no quotient' % h)
            g0 = value
            continue
        j = next(index for index, e in enumerate(gamma) if e)
        lowered = gamma[:j] + (gamma[j] - 1,) + gamma[j + 1:]
        terms[j][(lowered, h)] = value
    weight_cut = None if g.weight_cut is None else g.weight_cut - 2
    coeffs = [CommutantPolynomial(n, t, kind=g.kind, h_cut=g.h_cut, weight_cut=weight_cut)
              for t in terms]
    return g0, coeffs


class ClassicalNF(namedtuple('ClassicalNF', [
        'classification', 'cartan', 'frame', 'basis', 'C', 'generators', 'F', 'M',
        'M_symbols', 'normalized', 'constants', 'N', 'kind', 'lam'])):
    """
    Result of the classical iteration

    frame maps standard coordinates to the original ones; generators are
    applied in order by lie_transform after the frame; F and M are
    commutant polynomials, M_symbols their expansion in the basis.
    """
    __slots__ = ()

    @property
    def residuals(self):
        result = []
        for i, s in enumerate(self.normalized):
            expected = PolySymbol.zero(s.n, kind=s.kind)
            for entry, q in zip(self.M_symbols[i], self.basis):
                expected = expected + entry.as_kind(s.kind) * q.as_kind(s.kind)
            result.append((s - expected).truncate(deg_cut=self.N))
        return result


def classical_normal_form(system, N, seed=0, base=None):
    """
    Normal form of the hbar-free parts of a system up to degree N

    Arguments:
    system <IntegrableSystem> -- Commuting symbols with nondegenerate Hessians
    N <int> -- Degree cut of the normal form
    seed <int> -- Seed of the generic combination in the classification
    base <int> -- Override of the lambda base of the homological solver
    """
    if N < 2:
        raise TruncationError('Normal forms need a degree of at least 2, got %d' % N)
    if system.deg_cut is not None and system.deg_cut < N:
        raise TruncationError('System is known up to degree %d only, asked for %d'
                              % (system.deg_cut, N))
    symbols = [s.hbar_coefficient(0).with_cuts(deg_cut=N, h_cut=0) for s in system.symbols]
    symbols = [s.realified() for s in symbols]
    if any(s.kind.is_complex for s in symbols):
        raise CoefficientKindMismatch('Principal symbols must be real')
    ensure_critical(symbols)
    defects = commutation_defects(symbols, N)
    if defects:
        i, j, degree, _ = defects[0]
        raise CommutationViolated((i, j), degree)
    n = system.n
    frame = standard_frame([s.homogeneous_part(2) for s in symbols], symbols[0].kind, seed=seed)
    kind = frame.kind
    basis = [q.with_cuts(deg_cut=N, h_cut=0) for q in frame.basis]
    symbols = [substitute_linear(s.as_kind(kind), frame.matrix) for s in symbols]
    scale = _scale(symbols)
    symbols = [_clean(s, scale) for s in symbols]
    C_inv = invert([[kind.convert(v) for v in row] for row in frame.C], kind)
    solver = HomologicalSolver(basis, N, base=base)
    generators = []
    for k in range(3, N + 1):
        r = [s.homogeneous_part(k) for s in symbols]
        g = []
        for j in range(n):
            total = PolySymbol.zero(n, kind=kind, deg_cut=N, h_cut=0)
            for i in range(n):
                total = total + r[i].scale(C_inv[j][i])
            g.append(_clean(total, scale))
        defects = compatibility_defects(g, basis, N=k)
        if defects:
            i, j, degree = defects[0]
            raise CommutationViolated((i, j), degree)
        a = _clean(solver.solve(g, k).f.with_cuts(deg_cut=N, h_cut=0), scale)
        if a:
            symbols = [_clean(lie_transform(s, a, N), scale) for s in symbols]
            generators.append(a)
        logger.debug('Degree %d normalized with %d generator terms', k, len(a))
    F = [to_commutant(s, basis) for s in symbols]
    M = [taylor_division(F_i)[1] for F_i in F]
    M_symbols = [[entry.expand(basis, deg_cut=N) for entry in row] for row in M]
    logger.info('Classical normal form of type %s up to degree %d with %d generators',
                frame.classification.cartan.signature, N, len(generators))
    return ClassicalNF(
        frame.classification, frame.classification.cartan, frame.matrix, basis, frame.C,
        generators, F, M, M_symbols, symbols, system.constants, N, kind, solver.lam,
    )


def replay_classical(nf, symbols):
    """The original principal symbols moved to normal form coordinates."""
    result = []
    for s in symbols:
        s = s.hbar_coefficient(0).with_cuts(deg_cut=nf.N, h_cut=0).realified()
        result.append(substitute_linear(s.as_kind(nf.kind), nf.frame))
    for a in nf.generators:
        result = [lie_transform(s, a.as_kind(nf.kind), nf.N) for s in result]
    return result


def verify_classical_nf(nf, system):
    """
    Replay the frame and generators on the original system

    Every transformed symbol must Poisson-commute with the basis and equal
    sum_j M_ij q_j up to degree N.
    """
    report = CertificateReport('classical', nf.N)
    symbols = replay_classical(nf, system.symbols)
    scale = _scale(symbols) ** 2
    for i, s in enumerate(symbols):
        for j, q in enumerate(nf.basis):
            residual = poisson(s, q.as_kind(nf.kind)).truncate(deg_cut=nf.N)
            report.check('commutation', (i, j), _clean(residual, scale))
    for i, s in enumerate(symbols):
        expected = PolySymbol.zero(s.n, kind=nf.kind)
        for entry, q in zip(nf.M_symbols[i], nf.basis):
            expected = expected + entry.as_kind(nf.kind) * q.as_kind(nf.kind)
        report.check('matrix', (i,), _clean((s - expected).truncate(deg_cut=nf.N), scale))
    logger.info(report.describe())
    return report

