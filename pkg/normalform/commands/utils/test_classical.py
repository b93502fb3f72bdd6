import itertools
import unittest

from normalform.commands.utils.brackets import lie_transform
from normalform.commands.utils.brackets import poisson
from normalform.commands.utils.classical import IntegrableSystem
from normalform.commands.utils.classical import classical_normal_form
from normalform.commands.utils.classical import taylor_division
from normalform.commands.utils.classical import verify_classical_nf
from normalform.commands.utils.commutant import CommutantPolynomial
from normalform.commands.utils.errors import CommutationViolated
from normalform.commands.utils.errors import NotCartan
from normalform.commands.utils.errors import ParseError
from normalform.commands.utils.errors import TruncationError
from normalform.commands.utils.polynomial import CoefficientKind
from normalform.commands.utils.polynomial import PolySymbol
from normalform.commands.utils.systems import model_system

PLANTED_TYPES = [(1, 1, 0), (0, 0, 1), (1, 0, 0), (0, 1, 0), (2, 0, 0), (0, 2, 0)]


def x(n, j):
    return PolySymbol.x(n, j)


def xi(n, j):
    return PolySymbol.xi(n, j)


def q(n, terms):
    return CommutantPolynomial(n, dict((gamma, v) for gamma, v in terms.items()))


def block_order(C, C0):
    """Permutation p with C[i][j] == C0[i][p[j]], None when there is none."""
    n = len(C0)
    for p in itertools.permutations(range(n)):
        if all(C[i][j] == C0[i][p[j]] for i in range(n) for j in range(n)):
            return p
    return None


def reorder(F, p):
    """F with the variable p[j] renamed to j."""
    return CommutantPolynomial(F.n, dict(
        ((tuple(gamma[k] for k in p), h), v) for (gamma, h), v in F.terms.items()
    ))


class TestIntegrableSystem(unittest.TestCase):

    def test_from_json(self):
        data = {
            'n': 1,
            'symbols': [[
                {'x': [1], 'xi': [1], 'coeff': '1'},
                {'x': [0], 'xi': [0], 'coeff': '2'},
            ]],
        }
        system = IntegrableSystem.from_json(data)
        self.assertEqual(system.mode, 'rational')
        self.assertEqual(system.symbols[0], x(1, 0) * xi(1, 0))
        self.assertEqual(system.constants, [2])

    def test_mode_override(self):
        data = {'n': 1, 'symbols': [[{'x': [1], 'xi': [1], 'coeff': 1}]]}
        system = IntegrableSystem.from_json(data, mode='float')
        self.assertIs(system.kind, CoefficientKind.FLOAT)

    def test_base_point(self):
        data = {
            'n': 1,
            'base_point': [1, 0],
            'symbols': [[{'x': [1], 'xi': [1], 'coeff': '1'}]],
        }
        system = IntegrableSystem.from_json(data)
        self.assertEqual(system.symbols[0], x(1, 0) * xi(1, 0) + xi(1, 0))

    def test_malformed(self):
        with self.assertRaises(ParseError):
            IntegrableSystem.from_json({'symbols': []})
        with self.assertRaises(ParseError):
            IntegrableSystem.from_json({'n': 2, 'symbols': [[]]})

    def test_round_trip(self):
        system = IntegrableSystem([x(1, 0) * xi(1, 0) + x(1, 0) ** 3], deg_cut=5)
        again = IntegrableSystem.from_json(system.to_json())
        self.assertEqual(again.symbols, system.symbols)
        self.assertEqual(again.deg_cut, 5)


class TestTaylorDivision(unittest.TestCase):

    def test_first_index(self):
        g0, coeffs = taylor_division(q(2, {((2, 0), 0): 1, ((1, 1), 0): 1}))
        self.assertEqual(g0, 0)
        self.assertEqual(coeffs[0], q(2, {((1, 0), 0): 1, ((0, 1), 0): 1}))
        self.assertTrue(coeffs[1].is_zero())

    def test_constant(self):
        g0, coeffs = taylor_division(CommutantPolynomial.constant(2, 1))
        self.assertEqual(g0, 1)
        self.assertTrue(all(c.is_zero() for c in coeffs))

    def test_second_variable(self):
        g0, coeffs = taylor_division(CommutantPolynomial.variable(2, 1))
        self.assertEqual(g0, 0)
        self.assertTrue(coeffs[0].is_zero())
        self.assertEqual(coeffs[1], CommutantPolynomial.constant(2, 1))

    def test_rejects_hbar_constant(self):
        with self.assertRaises(ValueError):
            taylor_division(CommutantPolynomial(1, {((0,), 1): 1}))


class TestClassicalNormalForm(unittest.TestCase):

    def test_cubic_is_removed(self):
        system = IntegrableSystem([x(1, 0) * xi(1, 0) + x(1, 0) ** 3])
        nf = classical_normal_form(system, 6)
        self.assertEqual(nf.cartan.signature, (0, 1, 0))
        self.assertEqual(nf.F, [CommutantPolynomial.variable(1, 0)])
        self.assertEqual(nf.M, [[CommutantPolynomial.constant(1, 1)]])
        self.assertEqual(len(nf.generators), 1)
        self.assertEqual(nf.generators[0].degree(), 3)

    def test_function_of_q(self):
        h = x(1, 0) * xi(1, 0)
        nf = classical_normal_form(IntegrableSystem([h + h * h]), 4)
        self.assertEqual(nf.generators, [])
        self.assertEqual(nf.M, [[q(1, {((0,), 0): 1, ((1,), 0): 1})]])

    def test_residuals_vanish(self):
        system = IntegrableSystem([x(1, 0) * xi(1, 0) + x(1, 0) ** 3 + xi(1, 0) ** 4])
        nf = classical_normal_form(system, 6)
        for residual in nf.residuals:
            self.assertTrue(residual.is_zero())

    def test_planted_round_trip(self):
        for signature in PLANTED_TYPES:
            model = model_system(signature, seed=11, N=6, corrections=True)
            nf = classical_normal_form(model.system, 6)
            self.assertEqual(nf.cartan.signature, signature)
            p = block_order(nf.C, model.C0)
            self.assertIsNotNone(p, '%s: %s against %s' % (signature, nf.C, model.C0))
            self.assertEqual(nf.F, [reorder(F, p) for F in model.F])
            for i in range(model.cartan.n):
                for j in range(model.cartan.n):
                    self.assertEqual(nf.M[i][j].constant_term(), model.C0[i][p[j]])
            self.assertTrue(verify_classical_nf(nf, model.system).ok)

    def test_terms_above_first_generator_survive(self):
        h = x(1, 0) * xi(1, 0)
        symbol = lie_transform(h * 2 - h * h, x(1, 0) ** 3, 4)
        nf = classical_normal_form(IntegrableSystem([symbol], deg_cut=4), 4)
        self.assertEqual(len(nf.generators), 1)
        self.assertEqual(nf.F, [q(1, {((1,), 0): 2, ((2,), 0): -1})])
        self.assertEqual(nf.M, [[q(1, {((0,), 0): 2, ((1,), 0): -1})]])

    def test_normalized_symbols_commute_with_basis(self):
        model = model_system((1, 1, 0), seed=4, N=5)
        nf = classical_normal_form(model.system, 5)
        for s in nf.normalized:
            for b in nf.basis:
                self.assertTrue(poisson(s, b).truncate(deg_cut=5).is_zero())

    def test_idempotent(self):
        for signature in PLANTED_TYPES:
            model = model_system(signature)
            nf = classical_normal_form(model.system, 6)
            self.assertEqual(nf.generators, [])

    def test_float_mode(self):
        h = (x(1, 0) * xi(1, 0) + x(1, 0) ** 3).as_kind(CoefficientKind.FLOAT)
        nf = classical_normal_form(IntegrableSystem([h]), 5)
        self.assertIs(nf.kind, CoefficientKind.FLOAT)
        (F,) = nf.F
        self.assertAlmostEqual(F.terms[((1,), 0)], 1.0)
        self.assertEqual(len(F.terms), 1)

    def test_not_commuting(self):
        system = IntegrableSystem([x(2, 0) * xi(2, 0) + x(2, 1) ** 3, x(2, 1) * xi(2, 1)])
        with self.assertRaises(CommutationViolated) as context:
            classical_normal_form(system, 4)
        self.assertEqual(context.exception.pair, (0, 1))
        self.assertEqual(context.exception.degree, 3)

    def test_not_critical(self):
        system = IntegrableSystem([x(1, 0) + x(1, 0) * xi(1, 0)])
        with self.assertRaises(NotCartan) as context:
            classical_normal_form(system, 4)
        self.assertEqual(context.exception.failed_check, 'not critical')

    def test_degree_beyond_system(self):
        system = IntegrableSystem([x(1, 0) * xi(1, 0)], deg_cut=3)
        with self.assertRaises(TruncationError):
            classical_normal_form(system, 4)


class TestVerifyClassical(unittest.TestCase):

    def test_planted_system_is_certified(self):
        model = model_system((0, 0, 1), seed=2, N=5, corrections=True)
        nf = classical_normal_form(model.system, 5)
        report = verify_classical_nf(nf, model.system)
        self.assertTrue(report.ok)
        self.assertIsNone(report.to_json()['first_failure'])

    def test_corrupted_generator_is_located(self):
        model = model_system((1, 1, 0), seed=2, N=5)
        nf = classical_normal_form(model.system, 5)
        corrupted = [x(2, 0) ** 2 * xi(2, 1)] + list(nf.generators)
        report = verify_classical_nf(nf._replace(generators=corrupted), model.system)
        self.assertFalse(report.ok)
        self.assertEqual(report.first_failure.degree, 3)
        self.assertEqual(report.first_failure.h, 0)


if __name__ == '__main__':
    unittest.main()
