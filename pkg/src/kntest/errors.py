"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`KNTError`,
and most also from :class:`ValueError` so callers that only know about the
standard library still catch them.
"""


class KNTError(Exception):
    """Base class for all package errors."""


class InvalidDataError(KNTError, ValueError):
    """Input data violates a structural requirement (shape, finiteness, PSD)."""


class InvalidArgumentError(KNTError, ValueError):
    pass


class NumericalError(KNTError, ArithmeticError):
    """A numerical routine failed (e.g. eigensolver non-convergence)."""


class SingularOperatorError(KNTError, ValueError):
    """An operator of the form ``I + c*Sigma`` is not positive definite."""


class ParameterError(KNTError, ValueError):
    """A Gaussian parameter is not valid for the requested operation."""


class PreconditionError(ParameterError):
    """A kernel-specific precondition on the covariance spectrum fails."""


class RankDeficiencyError(KNTError, ValueError):
    pass


class RepresentationError(KNTError, ValueError):
    """A parameter cannot be expressed in the coordinates of the sample."""


class NondifferentiableError(KNTError, ArithmeticError):
    """The estimator map is not differentiable at the requested point."""


class LinearizationError(KNTError, ArithmeticError):
    pass


class DegenerateDataError(KNTError, ValueError):
    pass


class UnsupportedConfigurationError(KNTError, ValueError):
    pass
