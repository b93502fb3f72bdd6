"""
JSON documents written by the commands.

Every report starts with the same header (library version, bracket
convention, command and cuts) and is dumped with sorted keys and two-space
indentation so identical runs give identical bytes. Normal form reports
carry everything verify needs to replay the conjugation on the original
system: frame, generators, basis, M or Mh, alpha and the conjugators.
"""
import json
import logging
import sys

import numpy

from normalform import __version__
from normalform.commands.utils.brackets import CONVENTION
from normalform.commands.utils.classical import ClassicalNF
from normalform.commands.utils.commutant import CommutantPolynomial
from normalform.commands.utils.errors import ParseError
from normalform.commands.utils.polynomial import CoefficientKind
from normalform.commands.utils.polynomial import PolySymbol
from normalform.commands.utils.polynomial import parse_coefficient
from normalform.commands.utils.semiclassical import Conjugator
from normalform.commands.utils.semiclassical import SemiclassicalNF
from normalform.commands.utils.symplectic import CartanType
from normalform.commands.utils.symplectic import standard_j

logger = logging.getLogger(__name__)


def header(command, **cuts):
    return {
        'version': __version__,
        'convention': CONVENTION,
        'command': command,
        'cuts': cuts,
    }


def dumps(report):
    return json.dumps(report, sort_keys=True, indent=2) + '\n'


def write_report(report, path=None):
    """
    Write a report to a file, or to stdout when no path is given

    Arguments:
    report <dict> -- JSON-serializable document
    path <string> -- Output file
    """
    text = dumps(report)
    if not path:
        sys.stdout.write(text)
        return
    with open(path, 'w') as f:
        f.write(text)
    logger.info('Report written to %s', path)


def read_json(path):
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except (IOError, OSError) as e:
        raise ParseError('Cannot read "%s": %s' % (path, e))
    except ValueError as e:
        raise ParseError('"%s" is not valid JSON: %s' % (path, e))


def _field(data, key):
    try:
        return data[key]
    except (KeyError, TypeError):
        raise ParseError('Report has no field "%s"' % key)


def _kind(mode):
    try:
        return CoefficientKind(mode)
    except ValueError:
        raise ParseError('Unknown coefficient mode %r' % (mode,))


def _entry_kind(coefficients, kind):
    if any(isinstance(c, dict) for c in coefficients):
        return kind.complexified()
    return kind


# values and matrices

def float_to_json(value):
    value = complex(value)
    if value.imag:
        return {'re': value.real, 'im': value.imag}
    return value.real


def matrix_to_json(rows, kind):
    return [[kind.to_json(kind.convert(v)) for v in row] for row in rows]


def matrix_from_json(rows, kind):
    try:
        return [[parse_coefficient(v, kind) for v in row] for row in rows]
    except TypeError:
        raise ParseError('Malformed matrix %r' % (rows,))


def frame_residual(S):
    """max |S^T J S - J| of a float frame."""
    S = numpy.array(S, dtype=float)
    J = standard_j(S.shape[0] // 2)
    return float(numpy.abs(S.T.dot(J).dot(S) - J).max())


# symbols

def symbol_from_json(n, entries, kind, **cuts):
    kind = _entry_kind([e.get('coeff') for e in entries], kind)
    return PolySymbol.from_terms_json(n, entries, kind, **cuts)


def commutant_from_json(n, entries, kind):
    kind = _entry_kind([e.get('coeff') for e in entries], kind)
    return CommutantPolynomial.from_json(n, entries, kind)


# classification

def cartan_report_to_json(report):
    return {
        'commuting': report.commuting,
        'span_rank': report.span_rank,
        'semisimple': report.semisimple,
        'witness': list(report.witness),
        'eigenvalues': [float_to_json(v) for v in report.eigenvalues],
    }


def classification_to_json(classification):
    return {
        'cartan': classification.cartan.to_json(),
        'type': list(classification.cartan.signature),
        'S': classification.S.tolist(),
        'C': classification.C.tolist(),
        'witness': list(classification.witness),
        'frame_residual': frame_residual(classification.S),
    }


# classical normal form

def classical_to_json(nf, system):
    kind = nf.kind
    return {
        'mode': kind.value,
        'N': nf.N,
        'type': list(nf.cartan.signature),
        'cartan': nf.cartan.to_json(),
        'classification': classification_to_json(nf.classification),
        'frame': matrix_to_json(nf.frame, kind),
        'C': matrix_to_json(nf.C, kind),
        'basis': [q.terms_to_json() for q in nf.basis],
        'generators': [a.terms_to_json() for a in nf.generators],
        'F': [f.to_json() for f in nf.F],
        'M': [[entry.to_json() for entry in row] for row in nf.M],
        'M0': [[entry.kind.to_json(entry.constant_term()) for entry in row] for row in nf.M],
        'lambda': [int(v) for v in nf.lam],
        'constants': [system.kind.to_json(c) for c in nf.constants],
    }


def classical_from_json(data, n):
    """
    ClassicalNF holding what a replay needs

    The expansion of M in the basis is recomputed; the classification and
    the normalized symbols are not part of a report and stay None.
    """
    kind = _kind(_field(data, 'mode'))
    N = int(_field(data, 'N'))
    cartan = CartanType.from_json(_field(data, 'cartan'))
    if cartan.n != n:
        raise ParseError('Report of type %s does not fit %d degrees of freedom'
                         % (cartan.signature, n))
    basis = [symbol_from_json(n, entries, kind, deg_cut=N, h_cut=0)
             for entries in _field(data, 'basis')]
    generators = [symbol_from_json(n, entries, kind) for entries in _field(data, 'generators')]
    F = [commutant_from_json(n, entries, kind) for entries in _field(data, 'F')]
    M = [[commutant_from_json(n, entries, kind) for entries in row] for row in _field(data, 'M')]
    M_symbols = [[entry.expand(basis, deg_cut=N) for entry in row] for row in M]
    return ClassicalNF(
        None, cartan, matrix_from_json(_field(data, 'frame'), kind), basis,
        matrix_from_json(_field(data, 'C'), kind), generators, F, M, M_symbols, None,
        data.get('constants'), N, kind, data.get('lambda'),
    )


# semiclassical normal form

def semiclassical_to_json(nf, system):
    return {
        'mode': nf.kind.value,
        'N': nf.N,
        'N_h': nf.N_h,
        'W': nf.W,
        'gauge': nf.gauge,
        'classical': classical_to_json(nf.classical, system),
        'conjugators': [c.to_json() for c in nf.conjugators],
        'Mh': [[entry.to_json() for entry in row] for row in nf.Mh],
        'alpha': nf.alpha_levels_json(),
        'unitary': nf.unitary,
        'alpha_real': nf.alpha_real,
    }


def _alpha_from_json(levels, n, kind, N_h, W):
    if len(levels) != N_h or any(len(row) != n for row in levels):
        raise ParseError('alpha needs %d levels of %d constants' % (N_h, n))
    alpha = []
    for k in range(n):
        column = [row[k] for row in levels]
        entry_kind = _entry_kind(column, kind)
        terms = dict((((0,) * n, level), parse_coefficient(v, entry_kind))
                     for level, v in enumerate(column, 1))
        alpha.append(CommutantPolynomial(n, terms, kind=entry_kind, h_cut=N_h, weight_cut=W))
    return alpha


def semiclassical_from_json(data, n):
    kind = _kind(_field(data, 'mode'))
    N = int(_field(data, 'N'))
    N_h = int(_field(data, 'N_h'))
    W = int(_field(data, 'W'))
    cuts = dict(deg_cut=W, h_cut=N_h, weight_cut=W)
    classical = classical_from_json(_field(data, 'classical'), n)
    basis = [q.with_cuts(**cuts) for q in classical.basis]
    conjugators = []
    for entry in _field(data, 'conjugators'):
        c = symbol_from_json(n, _field(entry, 'c'), kind)
        conjugators.append(Conjugator(int(_field(entry, 'level')), _field(entry, 'gauge'), c))
    Mh = [[commutant_from_json(n, entries, kind) for entries in row] for row in _field(data, 'Mh')]
    Mh_symbols = [[entry.expand(basis, **cuts) for entry in row] for row in Mh]
    alpha = _alpha_from_json(_field(data, 'alpha'), n, kind, N_h, W)
    return SemiclassicalNF(
        classical, basis, classical.frame, classical.generators, conjugators, Mh, Mh_symbols,
        alpha, N, N_h, W, data.get('gauge'), kind, None, data.get('unitary'),
        data.get('alpha_real'),
    )
