"""Packaging settings."""


from codecs import open
from os.path import abspath
from os.path import dirname
from os.path import join
from subprocess import call

from setuptools import Command
from setuptools import setup

from normalform import __version__


this_dir = abspath(dirname(__file__))
with open(join(this_dir, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()


class RunTests(Command):
    """Run the test suite with coverage of the normalform package."""
    description = 'run tests'
    user_options = [('match=', 'k', 'only run tests matching the expression')]

    def initialize_options(self):
        self.match = None

    def finalize_options(self):
        pass

    def run(self):
        args = ['py.test', '--cov=normalform', '--cov-report=term-missing', 'normalform']
        if self.match:
            args.extend(['-k', self.match])
        raise SystemExit(call(args))


setup(
    name='normalform-cli',
    version=__version__,
    description='A CLI computing certified Birkhoff and semiclassical normal forms '
                'of integrable systems at nondegenerate singularities.',
    long_description=long_description,
    long_description_content_type='text/markdown',
    license='MIT',
    keywords='cli normal-form symplectic integrable-systems moyal',
    packages=['normalform', 'normalform.commands', 'normalform.commands.utils'],
    install_requires=[
        'docopt>=0.6.2',
        'numpy>=1.17',
        'scipy>=1.3',
        'sympy>=1.9',
        'mpmath>=1.1',
    ],
    extras_require={'test': ['coverage', 'pytest', 'pytest-cov', 'mock']},
    entry_points='''
        [console_scripts]
        normalform-cli=normalform.normalform:main
    ''',
    cmdclass={'test': RunTests},
)
