"""
normalform-cli

Usage:
  normalform-cli classify <system> [--mode=<mode>] [--seed=<seed>] [--out=<report>] [-v]
  normalform-cli classical <system> [--deg=<N>] [--mode=<mode>] [--seed=<seed>] [--lambda-base=<base>] [--out=<report>] [-v]
  normalform-cli semiclassical <system> [--deg=<N>] [--h-order=<N_h>] [--gauge=<gauge>] [--mode=<mode>] [--seed=<seed>] [--lambda-base=<base>] [--out=<report>] [-v]
  normalform-cli verify <system> <report> [--mode=<mode>] [--out=<report>] [-v]
  normalform-cli neumann <eigenvalues>... --fixed-point=<i> [--chart=<sign>] [--deg-cut=<d>] [--seed=<seed>] [--out=<report>] [-v]
  normalform-cli neumann --spec=<spec> [--chart=<sign>] [--deg-cut=<d>] [--seed=<seed>] [--out=<report>] [-v]
  normalform-cli model <type> [--deg=<N>] [--h-order=<N_h>] [--corrections] [--plain] [--seed=<seed>] [--out=<system>] [-v]
  normalform-cli -h | --help
  normalform-cli --version

Options:
  Normal forms:
    --deg=<N>                   Degree cut N of the normal form, at least 2 (default 6)
    --h-order=<N_h>             hbar order N_h (semiclassical default 2, model default 0)
    --gauge=<gauge>             linear or exponential conjugations from hbar^2 on [default: linear]
    --lambda-base=<base>        Base of the nonresonant weights of the homological solver (default N+1)
    --mode=<mode>               Coefficients: rational, gaussian, float or complex (default: the file's mode)

  Systems:
    --fixed-point=<i>           Index of the fixed point among the sorted eigenvalues
    --spec=<spec>               JSON {"eigenvalues": [..], "fixed_point": i, "deg_cut": d}
    --chart=<sign>              Graph chart of the sphere, + or - [default: +]
    --deg-cut=<d>               Degree cut of the reported chart Hamiltonian (default 4)
    --corrections               Plant q-quadratic terms so that M is not constant
    --plain                     Write the model forms without frame or generator

  Generic:
    --seed=<seed>               Seed of every random choice [default: 0]
    --out=<file>                Write the JSON document to a file instead of stdout
    -v --verbose                Log progress on stderr
    -h --help                   Show this screen.
    --version                   Show version.

Exit codes:
  0  success
  1  unreadable input or options
  2  violated precondition (not a Cartan subalgebra, non-commuting symbols, ...)
  3  failed verification

Systems are JSON documents
  {"n": n, "deg_cut": d, "h_cut": h, "mode": "rational", "base_point": [..],
   "symbols": [[{"x": [..], "xi": [..], "h": k, "coeff": "p/q"}, ..], ..]}

Examples:
  normalform-cli model 0,0,1 --deg=6 --corrections --seed=3 --out=focus.json
  normalform-cli classical focus.json --deg=6 --out=focus-nf.json
  normalform-cli verify focus.json focus-nf.json
  normalform-cli neumann 1 2 4 --fixed-point=1
"""
import logging
import sys

from docopt import docopt

from normalform import __version__ as VERSION
from normalform.commands.base import exit_for
from normalform.commands.catalog import Model
from normalform.commands.catalog import Neumann
from normalform.commands.normal_form import Classical
from normalform.commands.normal_form import Classify
from normalform.commands.normal_form import Semiclassical
from normalform.commands.normal_form import Verify
from normalform.commands.utils.errors import NormalFormError

COMMANDS = [Classify, Classical, Semiclassical, Verify, Neumann, Model]


def main():
    options = docopt(__doc__, version=VERSION)

    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if options.get('--verbose') else logging.WARNING,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )

    cmd = None
    try:
        for command in COMMANDS:
            if options.get(command.command_id):
                cmd = command(options)
                break
    except NormalFormError as e:
        raise exit_for(e)

    cmd.execute()
