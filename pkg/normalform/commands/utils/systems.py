"""
Test systems with a known answer.

The Neumann oscillator on T*S^n has a nondegenerate critical point at every
+-e_i; near it the system is read in the graph chart of the sphere. Model
systems plant a normal form: commuting models are recombined, moved by a
random symplectic frame and a Lie generator, and optionally given hbar
corrections.
"""
import itertools
import logging
from collections import namedtuple

import mpmath
import numpy

from normalform.commands.utils.brackets import lie_transform
from normalform.commands.utils.brackets import moyal_star
from normalform.commands.utils.brackets import moyal_transform
from normalform.commands.utils.classical import IntegrableSystem
from normalform.commands.utils.commutant import CommutantPolynomial
from normalform.commands.utils.errors import DimensionMismatch
from normalform.commands.utils.errors import ParseError
from normalform.commands.utils.errors import RepeatedEigenvalues
from normalform.commands.utils.linalg import exact_rank
from normalform.commands.utils.polynomial import CoefficientKind
from normalform.commands.utils.polynomial import Monomial
from normalform.commands.utils.polynomial import PolySymbol
from normalform.commands.utils.polynomial import infer_kind
from normalform.commands.utils.polynomial import monomial_basis
from normalform.commands.utils.polynomial import parse_coefficient
from normalform.commands.utils.polynomial import substitute_linear
from normalform.commands.utils.symplectic import ELLIPTIC
from normalform.commands.utils.symplectic import CartanType
from normalform.commands.utils.symplectic import centralizer_basis
from normalform.commands.utils.symplectic import hessian_at
from normalform.commands.utils.symplectic import model_forms
from normalform.commands.utils.symplectic import random_rational_symplectic
from normalform.commands.utils.symplectic import williamson_classify

logger = logging.getLogger(__name__)

PSLQ_MAXCOEFF = 50
PSLQ_DPS = 30
EIGENVALUE_TOL = 1e-12


class NeumannSpec(namedtuple('NeumannSpec', ['eigenvalues', 'fixed_point', 'kind'])):
    """
    Potential eigenvalues a_0 < .. < a_n and the fixed point +-e_i

    fixed_point indexes the sorted eigenvalues.
    """
    __slots__ = ()

    @classmethod
    def parse(cls, raw_eigenvalues, fixed_point):
        raw = list(raw_eigenvalues)
        if len(raw) < 2:
            raise DimensionMismatch('Need at least two eigenvalues, got %d' % len(raw))
        kind = infer_kind(raw)
        if kind.is_complex:
            raise ParseError('Eigenvalues must be real')
        values = sorted(parse_coefficient(v, kind) for v in raw)
        for a, b in zip(values, values[1:]):
            if kind.magnitude(b - a) <= EIGENVALUE_TOL * max(1.0, kind.magnitude(b)):
                raise RepeatedEigenvalues('Eigenvalue %s is repeated' % kind.to_json(a))
        fixed_point = int(fixed_point)
        if not 0 <= fixed_point < len(values):
            raise DimensionMismatch('No fixed point %d among %d eigenvalues'
                                    % (fixed_point, len(values)))
        return cls(tuple(values), fixed_point, kind)

    @property
    def n(self):
        return len(self.eigenvalues) - 1

    def expected_type(self):
        i = self.fixed_point
        return CartanType.from_counts(self.n - i, i, 0)

    def to_json(self):
        return {
            'eigenvalues': [self.kind.to_json(v) for v in self.eigenvalues],
            'fixed_point': self.fixed_point,
        }


NeumannLocalSystem = namedtuple('NeumannLocalSystem', [
    'spec', 'chart', 'hamiltonian', 'system', 'classification', 'expected', 'nonresonant',
])


def neumann_hamiltonian(spec, chart=1):
    """
    Neumann Hamiltonian in the graph chart x_i = chart * sqrt(1 - |y|^2)

    With the momentum lift xi = (eta, 0) the Hamiltonian
    1/2 <A x, x> + 1/2 (|x|^2 |xi|^2 - <x, xi>^2) restricted to the sphere is
    the polynomial

        1/2 sum_k (a_k - a_i) y_k^2 + 1/2 |eta|^2 - 1/2 <y, eta>^2

    up to the constant a_i / 2; the chart sign only enters through x_i^2.
    """
    if chart not in (1, -1):
        raise ValueError('Chart sign must be +1 or -1, got %r' % (chart,))
    kind = spec.kind
    n = spec.n
    a_i = spec.eigenvalues[spec.fixed_point]
    others = [a for k, a in enumerate(spec.eigenvalues) if k != spec.fixed_point]
    half = kind.convert('1/2')
    y = [PolySymbol.x(n, k, kind=kind) for k in range(n)]
    eta = [PolySymbol.xi(n, k, kind=kind) for k in range(n)]
    total = PolySymbol.zero(n, kind=kind)
    pairing = PolySymbol.zero(n, kind=kind)
    for k in range(n):
        total = total + (y[k] * y[k]).scale((others[k] - a_i) * half)
        total = total + (eta[k] * eta[k]).scale(half)
        pairing = pairing + y[k] * eta[k]
    return total - (pairing * pairing).scale(half)


def _mpf(value, kind):
    if kind.is_exact:
        return mpmath.mpf(int(value.numerator)) / int(value.denominator)
    return mpmath.mpf(value)


def _frequencies(spec):
    values = [_mpf(v, spec.kind) for v in spec.eigenvalues]
    return [mpmath.sqrt(abs(a - b)) for a, b in itertools.combinations(values, 2)]


def is_nonresonant(spec, maxcoeff=PSLQ_MAXCOEFF):
    """
    Heuristic: no integer relation with coefficients up to maxcoeff among
    the sqrt|a_j - a_k| is found by PSLQ.
    """
    with mpmath.mp.workdps(PSLQ_DPS):
        frequencies = _frequencies(spec)
        if len(frequencies) < 2:
            return True
        relation = mpmath.pslq(frequencies, maxcoeff=maxcoeff, maxsteps=10 ** 5)
    if relation is not None:
        logger.info('Integer relation %s among the frequencies', relation)
    return relation is None


def neumann_local_system(spec, chart=1, seed=0):
    """
    Local integrable system of the Neumann oscillator at a fixed point

    The quadratic part of the chart Hamiltonian is regular; its centralizer
    in sp(2n) gives n commuting quadratic forms, which are classified.
    """
    hamiltonian = neumann_hamiltonian(spec, chart=chart)
    quadratic = hamiltonian.homogeneous_part(2)
    forms = centralizer_basis(hessian_at(quadratic))
    system = IntegrableSystem(forms, deg_cut=2)
    classification = williamson_classify(system.symbols, seed=seed)
    expected = spec.expected_type()
    if classification.cartan.signature != expected.signature:
        logger.warning('Classified %s at fixed point %d, expected %s',
                       classification.cartan.signature, spec.fixed_point, expected.signature)
    return NeumannLocalSystem(
        spec, chart, hamiltonian, system, classification, expected, is_nonresonant(spec),
    )


ModelSystem = namedtuple('ModelSystem', [
    'system', 'cartan', 'C0', 'frame', 'generator', 'F', 'alpha',
])


def _random_recombination(cartan, rng, spread=2):
    """Invertible integer C0 with the column signs the classification produces."""
    n = cartan.n
    while True:
        C = [[int(v) for v in row] for row in rng.integers(-spread, spread + 1, size=(n, n))]
        if exact_rank(C) == n:
            break
    for block, indices in cartan.blocks:
        if block == ELLIPTIC:
            continue
        for j in indices:
            first = next(C[i][j] for i in range(n) if C[i][j])
            if first < 0:
                for i in range(n):
                    C[i][j] = -C[i][j]
    kind = CoefficientKind.RATIONAL
    return [[kind.convert(v) for v in row] for row in C]


def _random_generator(n, rng, degrees=(3, 4), size=3, spread=2):
    kind = CoefficientKind.RATIONAL
    terms = {}
    for k in degrees:
        basis = monomial_basis(n, k)
        for _ in range(size):
            exps = basis[int(rng.integers(len(basis)))]
            terms[Monomial(exps, 0)] = kind.convert(int(rng.integers(-spread, spread + 1)))
    return PolySymbol(n, terms, kind=kind)


def _planted_polynomials(cartan, C0, rng, corrections):
    n = cartan.n
    F = []
    for i in range(n):
        terms = dict(((tuple(int(k == j) for k in range(n)), 0), C0[i][j]) for j in range(n))
        if corrections:
            for j, k in itertools.combinations_with_replacement(range(n), 2):
                gamma = tuple(int(l == j) + int(l == k) for l in range(n))
                terms[(gamma, 0)] = int(rng.integers(-1, 2))
        F.append(CommutantPolynomial(n, terms))
    return F


def _planted_alpha(n, h_cut, rng):
    alpha = []
    for _ in range(n):
        terms = {}
        for h in range(1, h_cut + 1):
            terms[((0,) * n, h)] = parse_coefficient(
                '%d/%d' % (int(rng.integers(-3, 4)), int(rng.integers(1, 4))),
                CoefficientKind.RATIONAL,
            )
        alpha.append(CommutantPolynomial(n, terms, h_cut=h_cut))
    return alpha


def _quantize(F_i, alpha, models, cuts):
    """Weyl symbol of F_i(Q) shifted by -C0 alpha, products taken with the star."""
    n = len(models)
    kind = CoefficientKind.RATIONAL
    total = PolySymbol.zero(n, kind=kind, **cuts)
    for (gamma, h), value in F_i:
        factors = [models[j] for j, e in enumerate(gamma) for _ in range(e)]
        term = PolySymbol.constant(n, 1, kind=kind, **cuts)
        for factor in factors:
            term = moyal_star(term, factor.truncate(**cuts)).realified()
        total = total + term.times_hbar(h).scale(value)
        if sum(gamma) == 1:
            j = gamma.index(1)
            shift = alpha[j].expand(models, **cuts)
            total = total - shift.scale(value)
    return total


def model_system(cartan, seed=None, N=6, h_cut=0, corrections=False):
    """
    Commuting system whose normal form is known

    Arguments:
    cartan <CartanType> -- Williamson type of the quadratic parts
    seed <int> -- None returns the model forms themselves
    N <int> -- Degree cut of the Lie transform
    h_cut <int> -- hbar order of the planted corrections, 0 for classical
    corrections <bool> -- Plant q-quadratic terms so that M is not constant
    """
    if isinstance(cartan, (tuple, list)) and not isinstance(cartan, CartanType):
        cartan = CartanType.from_counts(*cartan)
    n = cartan.n
    models = model_forms(cartan)
    kind = CoefficientKind.RATIONAL
    identity = [[kind.convert(int(i == j)) for j in range(n)] for i in range(n)]
    if seed is None:
        F = [CommutantPolynomial.variable(n, j) for j in range(n)]
        alpha = [CommutantPolynomial.zero(n) for _ in range(n)]
        system = IntegrableSystem(models, deg_cut=None, h_cut=h_cut)
        frame = [[kind.convert(int(i == j)) for j in range(2 * n)] for i in range(2 * n)]
        return ModelSystem(system, cartan, identity, frame, PolySymbol.zero(n), F, alpha)
    rng = numpy.random.default_rng(seed)
    frame = random_rational_symplectic(n, rng)
    C0 = _random_recombination(cartan, rng)
    F = _planted_polynomials(cartan, C0, rng, corrections)
    generator = _random_generator(n, rng)
    alpha = _planted_alpha(n, h_cut, rng)
    if h_cut:
        W = N + 2 * h_cut
        cuts = dict(deg_cut=W, h_cut=h_cut, weight_cut=W)
        symbols = []
        for F_i in F:
            symbol = _quantize(F_i, alpha, models, cuts)
            symbol = substitute_linear(symbol, frame)
            symbols.append(moyal_transform(symbol, generator.truncate(**cuts)))
        system = IntegrableSystem(symbols, deg_cut=W, h_cut=h_cut)
    else:
        symbols = []
        for F_i in F:
            symbol = substitute_linear(F_i.expand(models), frame)
            symbols.append(lie_transform(symbol, generator, N))
        system = IntegrableSystem(symbols, deg_cut=N, h_cut=0)
    logger.debug('Model system of type %s with seed %s', cartan.signature, seed)
    return ModelSystem(system, cartan, C0, frame, generator, F, alpha)
