import unittest

import numpy
import sympy
from sympy import QQ
from sympy import QQ_I

from normalform.commands.utils.brackets import lie_transform
from normalform.commands.utils.brackets import moyal_bracket
from normalform.commands.utils.brackets import moyal_star
from normalform.commands.utils.brackets import moyal_transform
from normalform.commands.utils.brackets import poisson
from normalform.commands.utils.brackets import star_conjugate
from normalform.commands.utils.errors import InvalidGenerator
from normalform.commands.utils.errors import TruncationError
from normalform.commands.utils.polynomial import CoefficientKind
from normalform.commands.utils.polynomial import Monomial
from normalform.commands.utils.polynomial import PolySymbol
from normalform.commands.utils.polynomial import monomial_basis

X_SYM, HBAR = sympy.symbols('x hbar')


def random_symbol(rng, n, max_degree, min_degree=0, size=4, **cuts):
    terms = {}
    for _ in range(size):
        k = int(rng.integers(min_degree, max_degree + 1))
        basis = monomial_basis(n, k)
        exps = basis[int(rng.integers(len(basis)))]
        terms[Monomial(exps, 0)] = int(rng.integers(-5, 6))
    return PolySymbol(n, terms, **cuts)


def weyl_apply(p, phi):
    """Weyl quantization of a one-dimensional symbol applied to phi(x)."""
    total = sympy.Integer(0)
    domain = sympy.QQ_I if p.kind.is_complex else sympy.QQ
    for m, c in p.terms.items():
        alpha, beta = m.exps
        acc = sympy.Integer(0)
        for k in range(alpha + 1):
            g = X_SYM ** (alpha - k) * phi
            for _ in range(beta):
                g = -sympy.I * HBAR * sympy.diff(g, X_SYM)
            acc += sympy.binomial(alpha, k) * X_SYM ** k * g
        total += domain.to_sympy(c) * HBAR ** m.h * acc / 2 ** alpha
    return sympy.expand(total)


def model(n, j, name):
    x = PolySymbol.x(n, j)
    xi = PolySymbol.xi(n, j)
    if name == 'hyperbolic':
        return x * xi
    if name == 'elliptic':
        return x * x + xi * xi
    y = PolySymbol.x(n, j + 1)
    eta = PolySymbol.xi(n, j + 1)
    if name == 'focus':
        return x * eta - y * xi
    return x * xi + y * eta


class TestPoisson(unittest.TestCase):

    def test_canonical_pair(self):
        self.assertEqual(poisson(PolySymbol.xi(1, 0), PolySymbol.x(1, 0)), 1)

    def test_xi_squared_acts_as_derivative(self):
        x, xi = PolySymbol.x(1, 0), PolySymbol.xi(1, 0)
        g = x ** 3 * xi + x * x
        self.assertEqual(poisson(xi * xi, g), xi * g.derivative(0) * 2)

    def test_hyperbolic_eigenvalues(self):
        q = PolySymbol.x(1, 0) * PolySymbol.xi(1, 0)
        for alpha, beta in [(2, 1), (0, 3), (2, 2)]:
            m = PolySymbol.monomial(1, (alpha, beta))
            self.assertEqual(poisson(m, q), m * (beta - alpha))
            self.assertEqual(poisson(q, m), m * (alpha - beta))

    def test_jacobi(self):
        rng = numpy.random.default_rng(3)
        for _ in range(5):
            a, b, c = [random_symbol(rng, 2, 4, min_degree=1) for _ in range(3)]
            total = (
                poisson(a, poisson(b, c))
                + poisson(b, poisson(c, a))
                + poisson(c, poisson(a, b))
            )
            self.assertTrue(total.is_zero())


class TestStar(unittest.TestCase):

    def test_unit(self):
        a = PolySymbol.x(1, 0) ** 2 * PolySymbol.xi(1, 0)
        one = PolySymbol.constant(1, 1)
        self.assertEqual(moyal_star(a, one), a.as_kind(CoefficientKind.GAUSSIAN))

    def test_canonical_commutator(self):
        x, xi = PolySymbol.x(1, 0), PolySymbol.xi(1, 0)
        commutator = moyal_star(x, xi) - moyal_star(xi, x)
        expected = PolySymbol.hbar(1, kind=CoefficientKind.GAUSSIAN).scale(QQ_I(0, 1))
        self.assertEqual(commutator, expected)

    def test_weyl_quantization(self):
        monomials = []
        for k in range(5):
            monomials.extend(monomial_basis(1, k))
        tests = [X_SYM ** j for j in range(7)]
        for e1 in monomials:
            for e2 in monomials:
                a = PolySymbol.monomial(1, e1)
                b = PolySymbol.monomial(1, e2)
                star = moyal_star(a, b)
                for phi in tests:
                    self.assertEqual(
                        weyl_apply(star, phi),
                        weyl_apply(a, weyl_apply(b, phi)),
                        '%s * %s on %s' % (e1, e2, phi),
                    )

    def test_associativity(self):
        rng = numpy.random.default_rng(11)
        for _ in range(3):
            a, b, c = [
                random_symbol(rng, 1, 4, size=3, h_cut=4).as_kind(CoefficientKind.GAUSSIAN)
                for _ in range(3)
            ]
            self.assertEqual(
                moyal_star(moyal_star(a, b), c),
                moyal_star(a, moyal_star(b, c)),
            )


class TestMoyalBracket(unittest.TestCase):

    def test_antisymmetric_part_of_star(self):
        rng = numpy.random.default_rng(5)
        for _ in range(4):
            a = random_symbol(rng, 2, 4)
            b = random_symbol(rng, 2, 4)
            difference = moyal_star(a, b) - moyal_star(b, a)
            expected = moyal_bracket(a, b).times_hbar(1).as_kind(
                CoefficientKind.GAUSSIAN).scale(QQ_I(0, -1))
            self.assertEqual(difference, expected)

    def test_self_bracket(self):
        a = PolySymbol.x(1, 0) ** 3 + PolySymbol.xi(1, 0) ** 2
        self.assertTrue(moyal_bracket(a, a).is_zero())

    def test_cubic_pair(self):
        x, xi = PolySymbol.x(1, 0), PolySymbol.xi(1, 0)
        result = moyal_bracket(x ** 3, xi ** 3)
        expected = -9 * x * x * xi * xi + PolySymbol.hbar(1, 2) * QQ(3, 2)
        self.assertEqual(result, expected)
        self.assertIs(result.kind, CoefficientKind.RATIONAL)

    def test_corrections_are_even_powers(self):
        rng = numpy.random.default_rng(7)
        a = random_symbol(rng, 2, 5, size=6)
        b = random_symbol(rng, 2, 5, size=6)
        correction = moyal_bracket(a, b) - poisson(a, b)
        self.assertTrue(all(m.h >= 2 and m.h % 2 == 0 for m in correction.terms))

    def test_quadratic_exactness(self):
        rng = numpy.random.default_rng(13)
        models = [
            model(2, 0, 'hyperbolic'), model(2, 1, 'elliptic'),
            model(2, 0, 'focus'), model(2, 0, 'focus-radial'),
        ]
        for _ in range(100):
            f = random_symbol(rng, 2, 5, size=6)
            for q in models:
                self.assertEqual(moyal_bracket(f, q), poisson(f, q))


class TestLieTransform(unittest.TestCase):

    def test_zero_generator(self):
        f = PolySymbol.x(1, 0) * PolySymbol.xi(1, 0)
        self.assertEqual(lie_transform(f, PolySymbol.zero(1), 5), f)

    def test_commuting_generator(self):
        q = PolySymbol.x(1, 0) * PolySymbol.xi(1, 0)
        self.assertEqual(lie_transform(q, q * q, 6), q)

    def test_first_terms(self):
        x, xi = PolySymbol.x(1, 0), PolySymbol.xi(1, 0)
        f = x * xi
        a = x * x * xi
        result = lie_transform(f, a, 3)
        self.assertEqual(result, f - x * x * xi)

    def test_generator_cut_does_not_truncate(self):
        x, xi = PolySymbol.x(1, 0), PolySymbol.xi(1, 0)
        a = (x ** 3).with_cuts(deg_cut=3)
        result = lie_transform(xi * xi, a, 4)
        self.assertEqual(result, xi * xi - x * x * xi * 6 + x ** 4 * 9)

    def test_rejects_quadratic_generator(self):
        x = PolySymbol.x(1, 0)
        with self.assertRaises(InvalidGenerator):
            lie_transform(x, x * x, 4)

    def test_symplectic(self):
        rng = numpy.random.default_rng(17)
        a = random_symbol(rng, 1, 4, min_degree=3)
        f = random_symbol(rng, 1, 3, min_degree=1)
        g = random_symbol(rng, 1, 3, min_degree=1)
        N = 6
        left = poisson(lie_transform(f, a, N), lie_transform(g, a, N)).truncate(deg_cut=N - 1)
        right = lie_transform(poisson(f, g), a, N - 1)
        self.assertEqual(left, right)


class TestConjugations(unittest.TestCase):

    def test_moyal_transform_principal_part(self):
        x, xi = PolySymbol.x(1, 0), PolySymbol.xi(1, 0)
        p = (x * xi).with_cuts(deg_cut=6, h_cut=2)
        a = x ** 3 + x * x * xi
        result = moyal_transform(p, a)
        self.assertEqual(result.hbar_coefficient(0).with_cuts(deg_cut=6),
                         lie_transform(x * xi, a, 6))

    def test_moyal_transform_needs_cuts(self):
        x = PolySymbol.x(1, 0)
        with self.assertRaises(TruncationError):
            moyal_transform(x, x ** 3)

    def test_star_conjugate_trivial(self):
        p = (PolySymbol.x(1, 0) * PolySymbol.xi(1, 0)).with_cuts(h_cut=3)
        self.assertEqual(star_conjugate(p, PolySymbol.zero(1), 1, 3), p)
        constant = PolySymbol.constant(1, 5, h_cut=3)
        c = PolySymbol.x(1, 0) ** 3
        self.assertEqual(star_conjugate(constant, c, 1, 3), constant)

    def test_star_conjugate_leading_order(self):
        x, xi = PolySymbol.x(1, 0), PolySymbol.xi(1, 0)
        p = (x * xi).with_cuts(h_cut=2)
        c = x ** 3
        result = star_conjugate(p, c, 1, 2)
        expected = (p + moyal_bracket(p, c).times_hbar(2)).truncate(h_cut=2)
        self.assertEqual(result, expected)
        self.assertIs(result.kind, CoefficientKind.RATIONAL)

    def test_star_conjugate_cut_below_level(self):
        p = PolySymbol.x(1, 0)
        with self.assertRaises(TruncationError):
            star_conjugate(p, p, 3, 2)
