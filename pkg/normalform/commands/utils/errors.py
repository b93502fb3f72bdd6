"""
Exceptions raised by the normal-form engine.

Every exception carries the process exit code the CLI maps it to:
1 for unreadable input, 2 for a violated precondition and 3 for a failed
verification.
"""

EXIT_SUCCESS = 0
EXIT_PARSE = 1
EXIT_PRECONDITION = 2
EXIT_VERIFICATION = 3


class NormalFormError(Exception):
    exit_code = EXIT_PRECONDITION


class ParseError(NormalFormError):
    exit_code = EXIT_PARSE


class DimensionMismatch(NormalFormError, ValueError):
    pass


class CoefficientKindMismatch(NormalFormError, TypeError):
    pass


class TruncationError(NormalFormError, ValueError):
    pass


class InvalidGenerator(NormalFormError, ValueError):
    pass


class NotCartan(NormalFormError):

    def __init__(self, failed_check, message=None):
        self.failed_check = failed_check
        super(NotCartan, self).__init__(
            message or 'Quadratic parts do not span a Cartan subalgebra: %s'
            % failed_check
        )


class ResonantGenericityFailure(NormalFormError):
    pass


class ExactFrameError(NormalFormError):
    pass


class CommutationViolated(NormalFormError):

    def __init__(self, pair, degree, h_order=0):
        self.pair = tuple(pair)
        self.degree = degree
        self.h_order = h_order
        super(CommutationViolated, self).__init__(
            'Symbols %d and %d do not commute at degree %d, hbar order %d'
            % (self.pair[0], self.pair[1], degree, h_order)
        )


class IncompatibleSystem(NormalFormError):

    def __init__(self, pair, message=None):
        self.pair = tuple(pair)
        super(IncompatibleSystem, self).__init__(
            message or 'Right-hand sides %d and %d violate {g_i,q_j} = {g_j,q_i}'
            % self.pair
        )


class ResonanceDetected(NormalFormError):
    pass


class NotInKernel(NormalFormError):
    pass


class SingularM0(NormalFormError):
    pass


class RepeatedEigenvalues(NormalFormError, ValueError):
    pass


class VerificationFailed(NormalFormError):
    exit_code = EXIT_VERIFICATION

    def __init__(self, report):
        self.report = report
        super(VerificationFailed, self).__init__(report.describe())
