import unittest

from mock import patch

from normalform.commands.base import exit_for
from normalform.commands.utils.errors import ParseError
from normalform.normalform import main


class TestMain(unittest.TestCase):

    @patch('normalform.commands.catalog.write_report')
    def test_dispatch(self, write):
        with patch('sys.argv', ['normalform-cli', 'neumann', '1', '2', '4', '--fixed-point=2']):
            main()
        self.assertEqual(write.call_args[0][0]['type'], [0, 2, 0])

    def test_option_errors_exit_with_parse_code(self):
        with patch('sys.argv', ['normalform-cli', 'classical', 'system.json', '--deg=one']):
            with self.assertRaises(SystemExit) as context:
                main()
        self.assertEqual(context.exception.code, 1)

    @patch('normalform.normalform.exit_for', wraps=exit_for)
    def test_unknown_gauge_goes_through_parse_errors(self, mapped):
        argv = ['normalform-cli', 'semiclassical', 'system.json', '--gauge=weyl']
        with patch('sys.argv', argv):
            with self.assertRaises(SystemExit) as context:
                main()
        self.assertEqual(context.exception.code, 1)
        self.assertIsInstance(mapped.call_args[0][0], ParseError)

    def test_usage_error(self):
        with patch('sys.argv', ['normalform-cli', 'normalize']):
            with self.assertRaises(SystemExit):
                main()


if __name__ == '__main__':
    unittest.main()
