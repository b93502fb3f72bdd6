import logging

from normalform.commands.base import BaseCommand
from normalform.commands.base import int_option
from normalform.commands.utils.errors import EXIT_VERIFICATION
from normalform.commands.utils.errors import ParseError
from normalform.commands.utils.polynomial import CoefficientKind
from normalform.commands.utils.reports import classification_to_json
from normalform.commands.utils.reports import header
from normalform.commands.utils.reports import matrix_to_json
from normalform.commands.utils.reports import read_json
from normalform.commands.utils.reports import write_report
from normalform.commands.utils.symplectic import CartanType
from normalform.commands.utils.systems import NeumannSpec
from normalform.commands.utils.systems import model_system
from normalform.commands.utils.systems import neumann_local_system

logger = logging.getLogger(__name__)

DEFAULT_NEUMANN_DEG_CUT = 4

CHARTS = {'+': 1, '+1': 1, '1': 1, '-': -1, '-1': -1}


class Neumann(BaseCommand):
    """
    Type of the Neumann oscillator at one of its fixed points.

    The potential is given either as eigenvalues on the command line or as
    a --spec document {"eigenvalues": [..], "fixed_point": i, "deg_cut": d}.
    """
    command_id = 'neumann'

    def __init__(self, options, *args, **kwargs):
        super(Neumann, self).__init__(options, *args, **kwargs)

        spec_path = options.get('--spec')
        if spec_path:
            document = read_json(spec_path)
            if not isinstance(document, dict):
                raise ParseError('"%s" is not a Neumann spec' % spec_path)
            self.eigenvalues = document.get('eigenvalues') or []
            self.fixed_point = document.get('fixed_point')
            self.deg_cut = document.get('deg_cut')
        else:
            self.eigenvalues = options.get('<eigenvalues>') or []
            self.fixed_point = options.get('--fixed-point')
            self.deg_cut = None
        self.fixed_point = int_option({'--fixed-point': self.fixed_point}, '--fixed-point')
        if self.fixed_point is None:
            raise ParseError('No fixed point given')
        self.deg_cut = int_option(options, '--deg-cut', self.deg_cut or DEFAULT_NEUMANN_DEG_CUT)
        chart = options.get('--chart') or '+'
        if chart not in CHARTS:
            raise ParseError('--chart must be + or -, got %r' % chart)
        self.chart = CHARTS[chart]

    def run(self):
        spec = NeumannSpec.parse(self.eigenvalues, self.fixed_point)
        local = neumann_local_system(spec, chart=self.chart, seed=self.config.seed)
        found = local.classification.cartan.signature
        expected = local.expected.signature
        report = header(self.command_id, deg_cut=self.deg_cut, h_cut=0)
        report.update({
            'spec': spec.to_json(),
            'mode': spec.kind.value,
            'chart': '+' if self.chart > 0 else '-',
            'hamiltonian': local.hamiltonian.truncate(deg_cut=self.deg_cut).terms_to_json(),
            'system': local.system.to_json(),
            'classification': classification_to_json(local.classification),
            'type': list(found),
            'expected_type': list(expected),
            'matches': found == expected,
            'nonresonant': local.nonresonant,
        })
        write_report(report, self.config.out)
        if found != expected:
            logger.error('Fixed point %d has type %s, expected %s',
                         spec.fixed_point, found, expected)
            raise SystemExit(EXIT_VERIFICATION)


def parse_type(raw):
    """'m_e,m_h,m_f' to a CartanType."""
    try:
        counts = [int(v) for v in raw.split(',')]
    except (AttributeError, ValueError):
        raise ParseError('Type must read m_e,m_h,m_f, got %r' % (raw,))
    if len(counts) != 3 or min(counts) < 0 or not sum(counts):
        raise ParseError('Type must be three non-negative counts, got %r' % (raw,))
    return CartanType.from_counts(*counts)


class Model(BaseCommand):
    """
    Writes a system with a planted normal form.
    """
    command_id = 'model'

    def __init__(self, options, *args, **kwargs):
        super(Model, self).__init__(options, *args, **kwargs)

        self.cartan = parse_type(options.get('<type>'))
        self.h_cut = int_option(options, '--h-order', 0)
        self.corrections = bool(options.get('--corrections'))
        self.plain = bool(options.get('--plain'))

    def run(self):
        seed = None if self.plain else self.config.seed
        model = model_system(self.cartan, seed=seed, N=self.config.deg, h_cut=self.h_cut,
                             corrections=self.corrections)
        document = model.system.to_json()
        document.update(header(self.command_id, deg=self.config.deg, h_order=self.h_cut))
        document['planted'] = {
            'seed': seed,
            'type': list(self.cartan.signature),
            'C0': matrix_to_json(model.C0, CoefficientKind.RATIONAL),
            'frame': matrix_to_json(model.frame, CoefficientKind.RATIONAL),
            'generator': model.generator.terms_to_json(),
            'F': [f.to_json() for f in model.F],
            'alpha': [a.to_json() for a in model.alpha],
        }
        write_report(document, self.config.out)
