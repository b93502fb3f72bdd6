"""
Certificate reports of the normal form replays.
"""
import logging
from collections import namedtuple

logger = logging.getLogger(__name__)


class Failure(namedtuple('Failure', ['check', 'index', 'degree', 'h'])):
    """One failed identity, located at its lowest (degree, hbar power) block."""
    __slots__ = ()

    def to_json(self):
        return {
            'check': self.check,
            'index': list(self.index),
            'degree': self.degree,
            'h': self.h,
        }


def first_block(symbol):
    """Lowest nonzero (degree, hbar power) block, in weight order."""
    blocks = symbol.graded_blocks()
    return min(blocks, key=lambda b: (b[0] + 2 * b[1], b[1], b[0]))


class CertificateReport(object):
    """
    Outcome of replaying a normal form on the original symbols

    Arguments:
    stage <str> -- 'classical' or 'semiclassical'
    N <int> -- Degree up to which the identities must hold
    N_h <int> -- hbar order up to which the identities must hold
    """

    def __init__(self, stage, N, N_h=0):
        self.stage = stage
        self.N = N
        self.N_h = N_h
        self.failures = []

    def check(self, name, index, residual):
        """Record a failure when residual is not identically zero."""
        if residual.is_zero():
            return True
        degree, h = first_block(residual)
        self.failures.append(Failure(name, tuple(index), degree, h))
        logger.debug('Certificate check %s %s fails at degree %d, hbar^%d',
                     name, index, degree, h)
        return False

    @property
    def ok(self):
        return not self.failures

    @property
    def first_failure(self):
        if not self.failures:
            return None
        return min(self.failures, key=lambda f: (f.degree + 2 * f.h, f.h, f.degree))

    def describe(self):
        if self.ok:
            return '%s normal form certified up to degree %d, hbar^%d' % (
                self.stage, self.N, self.N_h)
        failure = self.first_failure
        return '%s normal form fails check %s %s at degree %d, hbar^%d (%d failures)' % (
            self.stage, failure.check, list(failure.index), failure.degree, failure.h,
            len(self.failures))

    def to_json(self):
        failure = self.first_failure
        return {
            'stage': self.stage,
            'ok': self.ok,
            'deg': self.N,
            'h_order': self.N_h,
            'first_failure': failure.to_json() if failure else None,
            'failures': [f.to_json() for f in self.failures],
            'description': self.describe(),
        }
