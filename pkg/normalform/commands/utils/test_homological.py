import unittest

import numpy
from sympy import QQ

from normalform.commands.utils.brackets import poisson
from normalform.commands.utils.commutant import CommutantPolynomial
from normalform.commands.utils.commutant import jacobian
from normalform.commands.utils.commutant import matrix_inverse
from normalform.commands.utils.commutant import matrix_product
from normalform.commands.utils.errors import IncompatibleSystem
from normalform.commands.utils.errors import NotInKernel
from normalform.commands.utils.homological import HomologicalSolver
from normalform.commands.utils.homological import check_compatibility
from normalform.commands.utils.homological import kernel_basis
from normalform.commands.utils.homological import nonresonant_lambda
from normalform.commands.utils.homological import solve_homological
from normalform.commands.utils.homological import to_commutant
from normalform.commands.utils.polynomial import CoefficientKind
from normalform.commands.utils.polynomial import Monomial
from normalform.commands.utils.polynomial import PolySymbol
from normalform.commands.utils.polynomial import monomial_basis
from normalform.commands.utils.symplectic import CartanType
from normalform.commands.utils.symplectic import model_forms

SIGNATURES = [(2, 0, 0), (1, 1, 0), (0, 2, 0), (0, 0, 1)]


def x(n, j):
    return PolySymbol.x(n, j)


def xi(n, j):
    return PolySymbol.xi(n, j)


def random_homogeneous(rng, n, k, size=4):
    basis = monomial_basis(n, k)
    terms = {}
    for _ in range(size):
        terms[Monomial(basis[int(rng.integers(len(basis)))], 0)] = int(rng.integers(-4, 5))
    return PolySymbol(n, terms)


def random_commutant(rng, n, max_q_degree):
    terms = {}
    for _ in range(3):
        gamma = tuple(int(v) for v in rng.integers(0, max_q_degree + 1, size=n))
        if 0 < sum(gamma) <= max_q_degree:
            terms[(gamma, 0)] = int(rng.integers(-3, 4))
    return CommutantPolynomial(n, terms)


class TestNonresonantLambda(unittest.TestCase):

    def test_examples(self):
        self.assertEqual(nonresonant_lambda([None, None], 6), [1, 7])
        self.assertEqual(nonresonant_lambda([None], 9), [1])
        self.assertEqual(nonresonant_lambda([None] * 3, 4), [1, 5, 25])

    def test_rejects_degree_zero(self):
        with self.assertRaises(ValueError):
            nonresonant_lambda([None], 0)


class TestKernelBasis(unittest.TestCase):

    def test_hyperbolic_quadratic(self):
        basis = kernel_basis([x(1, 0) * xi(1, 0)], 2)
        self.assertEqual(len(basis), 1)
        symbol = basis[0].to_symbol()
        self.assertEqual(list(m.exps for m in symbol.terms), [(1, 1)])

    def test_odd_degree_is_empty(self):
        self.assertEqual(kernel_basis([x(1, 0) * xi(1, 0)], 3), [])

    def test_elliptic_quartic(self):
        q = x(1, 0) ** 2 + xi(1, 0) ** 2
        basis = kernel_basis([q], 4)
        self.assertEqual(len(basis), 1)
        symbol = basis[0].to_symbol()
        self.assertEqual(symbol, (q * q).scale(symbol.coefficient((4,), (0,))))

    def test_kernel_commutes_with_every_quadratic(self):
        for signature in SIGNATURES:
            q_list = model_forms(CartanType.from_counts(*signature))
            for k in (2, 4):
                for component in kernel_basis(q_list, k):
                    symbol = component.to_symbol()
                    for q in q_list:
                        self.assertTrue(poisson(q, symbol).is_zero())


class TestCompatibility(unittest.TestCase):

    def test_exact_forms_are_closed(self):
        rng = numpy.random.default_rng(21)
        for signature in SIGNATURES:
            q_list = model_forms(CartanType.from_counts(*signature))
            f0 = random_homogeneous(rng, 2, 3) + random_homogeneous(rng, 2, 4)
            self.assertTrue(check_compatibility([poisson(q, f0) for q in q_list], q_list))

    def test_single_degree_of_freedom(self):
        self.assertTrue(check_compatibility([x(1, 0) ** 3], [x(1, 0) * xi(1, 0)]))

    def test_open_form(self):
        q_list = model_forms(CartanType.from_counts(0, 2, 0))
        self.assertFalse(check_compatibility([x(2, 1), PolySymbol.zero(2)], q_list))


class TestSolveHomological(unittest.TestCase):

    def test_hyperbolic_image(self):
        q = x(1, 0) * xi(1, 0)
        solution = solve_homological([q], [x(1, 0) ** 2 * xi(1, 0)], 3)
        self.assertEqual(solution.f, x(1, 0) ** 2 * xi(1, 0))
        self.assertTrue(solution.F_list[0].is_zero())

    def test_hyperbolic_kernel(self):
        q = x(1, 0) * xi(1, 0)
        solution = solve_homological([q], [q * q], 4)
        self.assertTrue(solution.f.is_zero())
        self.assertEqual(solution.F_list[0], q * q)

    def test_elliptic_split(self):
        q = x(1, 0) ** 2 + xi(1, 0) ** 2
        solution = solve_homological([q], [x(1, 0) ** 2], 2)
        self.assertEqual(solution.f, x(1, 0) * xi(1, 0) * QQ(-1, 4))
        self.assertEqual(solution.F_list[0], q * QQ(1, 2))
        self.assertTrue(solution.is_exact())

    def test_elliptic_split_in_float_mode(self):
        q = (x(1, 0) ** 2 + xi(1, 0) ** 2).as_kind(CoefficientKind.FLOAT)
        solution = solve_homological([q], [x(1, 0).as_kind(CoefficientKind.FLOAT) ** 2], 2)
        self.assertAlmostEqual(solution.f.coefficient((1,), (1,)), -0.25)
        self.assertAlmostEqual(solution.F_list[0].coefficient((0,), (2,)), 0.5)

    def test_residuals_and_uniqueness(self):
        rng = numpy.random.default_rng(33)
        N = 8
        for signature in SIGNATURES + [(1, 0, 0), (0, 1, 0)]:
            q_list = model_forms(CartanType.from_counts(*signature))
            n = len(q_list)
            first_solver = HomologicalSolver(q_list, N)
            second_solver = HomologicalSolver(q_list, N, base=N + 2)
            for _ in range(50):
                f0 = PolySymbol.zero(n)
                for k in range(3, N + 1):
                    f0 = f0 + random_homogeneous(rng, n, k, size=2)
                planted = [random_commutant(rng, n, N // 2).expand(q_list) for _ in q_list]
                g_list = [poisson(q, f0) + F for q, F in zip(q_list, planted)]
                first = first_solver.solve(g_list, N)
                second = second_solver.solve(g_list, N)
                for residual in first.residuals:
                    self.assertTrue(residual.is_zero())
                self.assertEqual(first.F_list, [F.truncate(deg_cut=N) for F in planted])
                self.assertEqual(first.F_list, second.F_list)
                self.assertEqual(first.f, second.f)
            if n > 1:
                self.assertNotEqual(first_solver.lam, second_solver.lam)

    def test_linearity(self):
        rng = numpy.random.default_rng(5)
        q_list = model_forms(CartanType.from_counts(1, 1, 0))
        f1 = random_homogeneous(rng, 2, 3)
        f2 = random_homogeneous(rng, 2, 4)
        g1 = [poisson(q, f1) for q in q_list]
        g2 = [poisson(q, f2) + q * q for q in q_list]
        combined = [a * 2 - b * 3 for a, b in zip(g1, g2)]
        s1 = solve_homological(q_list, g1, 4)
        s2 = solve_homological(q_list, g2, 4)
        s = solve_homological(q_list, combined, 4)
        self.assertEqual(s.f, s1.f * 2 - s2.f * 3)
        self.assertEqual(s.F_list, [a * 2 - b * 3 for a, b in zip(s1.F_list, s2.F_list)])

    def test_hbar_blocks(self):
        q = x(1, 0) * xi(1, 0)
        g = (x(1, 0) ** 2 * xi(1, 0) + q).times_hbar(2)
        solution = solve_homological([q], [g], 3)
        self.assertEqual(solution.f, (x(1, 0) ** 2 * xi(1, 0)).times_hbar(2))
        self.assertEqual(solution.F_list[0], q.times_hbar(2))

    def test_incompatible(self):
        q_list = model_forms(CartanType.from_counts(0, 2, 0))
        with self.assertRaises(IncompatibleSystem) as context:
            solve_homological(q_list, [x(2, 1), PolySymbol.zero(2)], 3)
        self.assertEqual(context.exception.pair, (0, 1))


class TestCommutant(unittest.TestCase):

    def test_to_commutant(self):
        q_list = model_forms(CartanType.from_counts(0, 0, 1))
        q1, q2 = q_list
        p = q1 * q1 + q1 * q2 * 3 + q2.times_hbar(1) + PolySymbol.constant(2, 5)
        coords = to_commutant(p, q_list)
        expected = CommutantPolynomial(2, {
            ((2, 0), 0): 1, ((1, 1), 0): 3, ((0, 1), 1): 1, ((0, 0), 0): 5,
        })
        self.assertEqual(coords, expected)
        self.assertEqual(coords.expand(q_list), p)

    def test_not_in_kernel(self):
        q_list = model_forms(CartanType.from_counts(0, 2, 0))
        with self.assertRaises(NotInKernel):
            to_commutant(x(2, 0), q_list)
        with self.assertRaises(NotInKernel):
            to_commutant(x(2, 0) * x(2, 0), q_list)

    def test_jacobian(self):
        F = CommutantPolynomial(2, {((2, 1), 0): 3, ((0, 1), 0): 1})
        (row,) = jacobian([F])
        self.assertEqual(row[0], CommutantPolynomial(2, {((1, 1), 0): 6}))
        self.assertEqual(row[1], CommutantPolynomial(2, {((2, 0), 0): 3, ((0, 0), 0): 1}))

    def test_matrix_inverse(self):
        one = CommutantPolynomial.constant(2, 1)
        q1 = CommutantPolynomial.variable(2, 0)
        q2 = CommutantPolynomial.variable(2, 1)
        M = [[one * 2 + q1, q2], [q1 * q2, one + q2 * q2]]
        inverse = matrix_inverse(M, 6)
        product = matrix_product(M, inverse)
        for i in range(2):
            for j in range(2):
                self.assertEqual(product[i][j].truncate(weight_cut=6), one if i == j else one * 0)
