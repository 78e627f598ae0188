"""
Errors - Exception hierarchy shared by the library and the command line
"""


class MomentSosError(Exception):
    """Base class for every error raised by momentsos."""

    code = 'error'
    exit_code = 3

    def __init__(self, message, code=None):
        super().__init__(message)
        self.message = message
        if code is not None:
            self.code = code

    def to_dict(self):
        """Convert error to dictionary for reports."""
        return {'error': self.message, 'code': self.code}


class SizingError(MomentSosError):
    """A basis or program size exceeds what can be represented."""

    code = 'sizing'


class DimensionMismatchError(MomentSosError, ValueError):
    """Operands live in spaces with different variable counts or shapes."""

    code = 'dimension-mismatch'


class DegreeError(MomentSosError, ValueError):
    """A polynomial degree exceeds the truncation of a moment sequence."""

    code = 'degree'


class MomentError(MomentSosError, ValueError):
    """A moment sequence is incomplete or too short for the request."""

    code = 'moment'


class OrderError(MomentSosError, ValueError):
    """A relaxation order is below the minimal order of the problem."""

    code = 'order'


class ProgramError(MomentSosError, ValueError):
    """A conic program or solution is malformed."""

    code = 'program'


class CertificateRejected(MomentSosError):
    """A recovered SOS certificate fails its residual check."""

    code = 'certificate-rejected'
    exit_code = 4

    def __init__(self, message, residual_norm=None):
        super().__init__(message)
        self.residual_norm = residual_norm


class ExtractionFailed(MomentSosError):
    """Atom extraction failed after a rank test."""

    code = 'extraction-failed'
    exit_code = 4


class SetError(MomentSosError, ValueError):
    """A semialgebraic set, ball radius or constraint scaling is invalid."""

    code = 'set'


class GpmError(MomentSosError, ValueError):
    """A generalized moment problem violates the relaxation hypotheses."""

    code = 'gpm'


class ConfigError(MomentSosError, ValueError):
    """An environment setting has an invalid value."""

    code = 'config'
    exit_code = 1


class ProblemFileError(MomentSosError):
    """A problem file cannot be parsed or validated."""

    code = 'schema'
    exit_code = 2

    def __init__(self, message, code=None, location=None):
        super().__init__(message, code=code)
        self.location = location

    def to_dict(self):
        payload = super().to_dict()
        if self.location is not None:
            payload['location'] = self.location
        return payload
