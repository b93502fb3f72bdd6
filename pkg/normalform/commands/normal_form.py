from normalform.commands.base import BaseCommand
from normalform.commands.base import int_option
from normalform.commands.utils.classical import IntegrableSystem
from normalform.commands.utils.classical import classical_normal_form
from normalform.commands.utils.classical import standard_frame
from normalform.commands.utils.classical import verify_classical_nf
from normalform.commands.utils.errors import CoefficientKindMismatch
from normalform.commands.utils.errors import NotCartan
from normalform.commands.utils.errors import ParseError
from normalform.commands.utils.errors import VerificationFailed
from normalform.commands.utils.reports import cartan_report_to_json
from normalform.commands.utils.reports import classical_from_json
from normalform.commands.utils.reports import classical_to_json
from normalform.commands.utils.reports import classification_to_json
from normalform.commands.utils.reports import header
from normalform.commands.utils.reports import matrix_to_json
from normalform.commands.utils.reports import read_json
from normalform.commands.utils.reports import semiclassical_from_json
from normalform.commands.utils.reports import semiclassical_to_json
from normalform.commands.utils.reports import write_report
from normalform.commands.utils.semiclassical import GAUGES
from normalform.commands.utils.semiclassical import LINEAR
from normalform.commands.utils.semiclassical import semiclassical_normal_form
from normalform.commands.utils.semiclassical import verify_semiclassical_nf
from normalform.commands.utils.symplectic import verify_cartan


class AbstractAnalysis(BaseCommand):
    """
    Reads a system document, runs one stage of the engine and writes a
    JSON report to --out or stdout.
    """

    def __init__(self, options, *args, **kwargs):
        super(AbstractAnalysis, self).__init__(options, *args, **kwargs)
        self.system_path = options.get('<system>')

    def load_system(self):
        """
        Read the input system, applying --mode when given
        """
        if not self.system_path:
            # docopt makes <system> mandatory
            raise ParseError('No system file given')
        return IntegrableSystem.from_json(read_json(self.system_path), mode=self.config.mode)

    def header(self, system, **cuts):
        cuts.update(deg_cut=system.deg_cut, h_cut=system.h_cut)
        report = header(self.command_id, **cuts)
        report['input'] = self.system_path
        report['mode'] = system.mode
        report['n'] = system.n
        return report

    def emit(self, report):
        write_report(report, self.config.out)


class Classify(AbstractAnalysis):
    """
    Williamson type of the quadratic parts at the base point.
    """
    command_id = 'classify'

    def run(self):
        system = self.load_system()
        quadratics = [s.hbar_coefficient(0).homogeneous_part(2).realified()
                      for s in system.symbols]
        if any(q.kind.is_complex for q in quadratics):
            raise CoefficientKindMismatch('Quadratic parts must be real')
        report = self.header(system)
        try:
            frame = standard_frame(quadratics, quadratics[0].kind, seed=self.config.seed)
        except NotCartan as e:
            report['ok'] = False
            report['reason'] = e.failed_check
            report['message'] = str(e)
            if e.failed_check != 'count':
                report['diagnostics'] = cartan_report_to_json(
                    verify_cartan(quadratics, seed=self.config.seed))
            self.emit(report)
            raise
        report['ok'] = True
        report['classification'] = classification_to_json(frame.classification)
        report['type'] = list(frame.classification.cartan.signature)
        if frame.kind.is_exact:
            report['exact'] = {
                'frame': matrix_to_json(frame.matrix, frame.kind),
                'C': matrix_to_json(frame.C, frame.kind),
                'basis': [q.terms_to_json() for q in frame.basis],
            }
        self.emit(report)


class Classical(AbstractAnalysis):
    """
    Classical normal form up to --deg, certified by a replay.
    """
    command_id = 'classical'

    def __init__(self, options, *args, **kwargs):
        super(Classical, self).__init__(options, *args, **kwargs)
        self.base = int_option(options, '--lambda-base')

    def run(self):
        system = self.load_system()
        nf = classical_normal_form(system, self.config.deg, seed=self.config.seed, base=self.base)
        certificate = verify_classical_nf(nf, system)
        report = self.header(system, deg=nf.N)
        report['normal_form'] = classical_to_json(nf, system)
        report['certificate'] = certificate.to_json()
        self.emit(report)
        if not certificate.ok:
            raise VerificationFailed(certificate)


class Semiclassical(AbstractAnalysis):
    """
    Semiclassical normal form up to --deg and --h-order, certified by a replay.
    """
    command_id = 'semiclassical'

    def __init__(self, options, *args, **kwargs):
        super(Semiclassical, self).__init__(options, *args, **kwargs)
        self.base = int_option(options, '--lambda-base')
        self.gauge = options.get('--gauge') or LINEAR
        if self.gauge not in GAUGES:
            raise ParseError('Unknown gauge "%s", expected one of %s' % (self.gauge, list(GAUGES)))

    def run(self):
        system = self.load_system()
        nf = semiclassical_normal_form(
            system, self.config.deg, self.config.h_order, gauge=self.gauge,
            seed=self.config.seed, base=self.base,
        )
        certificate = verify_semiclassical_nf(nf, system)
        report = self.header(system, deg=nf.N, h_order=nf.N_h, weight=nf.W)
        report['normal_form'] = semiclassical_to_json(nf, system)
        report['certificate'] = certificate.to_json()
        self.emit(report)
        if not certificate.ok:
            raise VerificationFailed(certificate)


class Verify(AbstractAnalysis):
    """
    Replays a normal form report on its system from scratch.

    Only the frame, the generators, the conjugators and the announced
    normal form are read from the report; every residual is recomputed.
    """
    command_id = 'verify'

    def __init__(self, options, *args, **kwargs):
        super(Verify, self).__init__(options, *args, **kwargs)
        self.report_path = options.get('<report>')

    def run(self):
        system = self.load_system()
        document = read_json(self.report_path)
        command = document.get('command') if isinstance(document, dict) else None
        if command == Classical.command_id:
            nf = classical_from_json(document.get('normal_form'), system.n)
            certificate = verify_classical_nf(nf, system)
            report = self.header(system, deg=nf.N)
        elif command == Semiclassical.command_id:
            nf = semiclassical_from_json(document.get('normal_form'), system.n)
            certificate = verify_semiclassical_nf(nf, system)
            report = self.header(system, deg=nf.N, h_order=nf.N_h, weight=nf.W)
        else:
            raise ParseError('"%s" is not a normal form report' % self.report_path)
        report['verified'] = command
        report['report'] = self.report_path
        report['certificate'] = certificate.to_json()
        self.emit(report)
        if not certificate.ok:
            raise VerificationFailed(certificate)
