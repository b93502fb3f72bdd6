import json
import os
import unittest
from tempfile import NamedTemporaryFile

from mock import patch
from sympy import QQ

from normalform.commands.normal_form import Classical
from normalform.commands.normal_form import Classify
from normalform.commands.normal_form import Semiclassical
from normalform.commands.normal_form import Verify
from normalform.commands.utils.classical import IntegrableSystem
from normalform.commands.utils.errors import ParseError
from normalform.commands.utils.polynomial import CoefficientKind
from normalform.commands.utils.polynomial import PolySymbol
from normalform.commands.utils.polynomial import parse_coefficient
from normalform.commands.utils.reports import dumps
from normalform.commands.utils.symplectic import CartanType
from normalform.commands.utils.symplectic import model_forms
from normalform.commands.utils.systems import model_system


def x(n, j):
    return PolySymbol.x(n, j)


def xi(n, j):
    return PolySymbol.xi(n, j)


SHIFTED = IntegrableSystem([x(1, 0) * xi(1, 0) + PolySymbol.hbar(1).scale(QQ(3, 2))], h_cut=1)


class CommandTestCase(unittest.TestCase):

    def write_json(self, document):
        with NamedTemporaryFile('w', suffix='.json', delete=False) as f:
            if isinstance(document, str):
                f.write(document)
            else:
                json.dump(document, f)
        self.addCleanup(os.remove, f.name)
        return f.name

    def write_system(self, system):
        return self.write_json(system.to_json())

    def run_command(self, command, options):
        """Run a command and return the report it writes."""
        with patch('normalform.commands.normal_form.write_report') as write:
            command(options).run()
        return write.call_args[0][0]


class TestClassify(CommandTestCase):

    def test_focus_focus(self):
        forms = model_forms(CartanType.from_counts(0, 0, 1))
        path = self.write_system(IntegrableSystem(forms, deg_cut=2))
        report = self.run_command(Classify, {'<system>': path})
        self.assertTrue(report['ok'])
        self.assertEqual(report['type'], [0, 0, 1])
        self.assertEqual(report['command'], 'classify')
        self.assertLess(report['classification']['frame_residual'], 1e-9)
        self.assertIn('exact', report)

    def test_nilpotent_is_rejected(self):
        path = self.write_json({'n': 1, 'symbols': [[{'x': [0], 'xi': [2], 'coeff': '1'}]]})
        with patch('normalform.commands.normal_form.write_report') as write:
            with self.assertRaises(SystemExit) as context:
                Classify({'<system>': path}).execute()
        self.assertEqual(context.exception.code, 2)
        report = write.call_args[0][0]
        self.assertFalse(report['ok'])
        self.assertEqual(report['reason'], 'not semisimple')
        self.assertFalse(report['diagnostics']['semisimple'])

    def test_malformed_json(self):
        path = self.write_json('{"n": 1, "symbols": ')
        with self.assertRaises(SystemExit) as context:
            Classify({'<system>': path}).execute()
        self.assertEqual(context.exception.code, 1)

    def test_missing_file(self):
        with self.assertRaises(SystemExit) as context:
            Classify({'<system>': 'ifthisfileexistsyouhaveissues.json'}).execute()
        self.assertEqual(context.exception.code, 1)


class TestClassical(CommandTestCase):

    def test_already_normal(self):
        path = self.write_system(IntegrableSystem([x(1, 0) * xi(1, 0)]))
        report = self.run_command(Classical, {'<system>': path, '--deg': '4'})
        self.assertEqual(report['normal_form']['generators'], [])
        self.assertTrue(report['certificate']['ok'])
        self.assertEqual(report['cuts']['deg'], 4)

    def test_planted_fixture(self):
        model = model_system((1, 1, 0), seed=11, N=5, corrections=True)
        path = self.write_system(model.system)
        report = self.run_command(Classical, {'<system>': path, '--deg': '5'})
        self.assertTrue(report['certificate']['ok'])
        found = [[parse_coefficient(v, CoefficientKind.RATIONAL) for v in row]
                 for row in report['normal_form']['M0']]
        self.assertEqual(found, model.C0)

    def test_same_input_same_bytes(self):
        path = self.write_system(IntegrableSystem([x(1, 0) * xi(1, 0) + x(1, 0) ** 3]))
        options = {'<system>': path, '--deg': '5'}
        first = self.run_command(Classical, options)
        second = self.run_command(Classical, options)
        self.assertEqual(dumps(first), dumps(second))

    def test_degree_below_two(self):
        with self.assertRaises(ParseError):
            Classical({'<system>': 'system.json', '--deg': '1'})

    def test_not_commuting_exits_with_precondition(self):
        system = IntegrableSystem([x(2, 0) * xi(2, 0) + x(2, 1) ** 3, x(2, 1) * xi(2, 1)])
        path = self.write_system(system)
        with self.assertRaises(SystemExit) as context:
            Classical({'<system>': path, '--deg': '4'}).execute()
        self.assertEqual(context.exception.code, 2)


class TestSemiclassical(CommandTestCase):

    def test_subprincipal_constant(self):
        path = self.write_system(SHIFTED)
        report = self.run_command(Semiclassical, {'<system>': path, '--deg': '2', '--h-order': '1'})
        self.assertEqual(report['normal_form']['alpha'], [['-3/2']])
        self.assertTrue(report['certificate']['ok'])
        self.assertEqual(report['cuts']['weight'], 4)

    def test_unknown_gauge(self):
        with self.assertRaises(ParseError):
            Semiclassical({'<system>': 'system.json', '--gauge': 'weyl'})


class TestVerify(CommandTestCase):

    def normal_form_report(self, command, system, options):
        path = self.write_system(system)
        options = dict(options, **{'<system>': path})
        return path, self.run_command(command, options)

    def verify(self, system_path, report):
        options = {'<system>': system_path, '<report>': self.write_json(report)}
        with patch('normalform.commands.normal_form.write_report'):
            Verify(options).execute()

    def test_valid_pair(self):
        path, report = self.normal_form_report(Semiclassical, SHIFTED,
                                               {'--deg': '2', '--h-order': '1'})
        self.verify(path, report)

    def test_tampered_alpha(self):
        path, report = self.normal_form_report(Semiclassical, SHIFTED,
                                               {'--deg': '2', '--h-order': '1'})
        report['normal_form']['alpha'] = [['-1/2']]
        with self.assertRaises(SystemExit) as context:
            self.verify(path, report)
        self.assertEqual(context.exception.code, 3)

    def test_tampered_generator(self):
        model = model_system((1, 1, 0), seed=2, N=5)
        path, report = self.normal_form_report(Classical, model.system, {'--deg': '5'})
        self.verify(path, report)
        report['normal_form']['generators'].insert(
            0, [{'x': [2, 0], 'xi': [0, 1], 'h': 0, 'coeff': '1'}])
        with self.assertRaises(SystemExit) as context:
            self.verify(path, report)
        self.assertEqual(context.exception.code, 3)

    def test_not_a_report(self):
        path = self.write_system(SHIFTED)
        with self.assertRaises(SystemExit) as context:
            self.verify(path, {'command': 'classify'})
        self.assertEqual(context.exception.code, 1)


if __name__ == '__main__':
    unittest.main()
