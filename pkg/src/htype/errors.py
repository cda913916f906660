"""Exception and warning types raised by the library."""


class HTypeError(Exception):
    """Base class for library errors."""


class AdmissibilityError(HTypeError, ValueError):
    """No H-type structure exists for the requested dimensions."""


class DomainError(HTypeError, ValueError):
    """An argument lies outside the domain of the operation."""


class PreconditionError(HTypeError, ValueError):
    """An evaluator was called outside the region it is built for."""


class QuadratureError(HTypeError, ArithmeticError):
    """Numerical integration failed to reach its tolerance.

    Carries the partial value and error estimate reached before giving up.
    """

    def __init__(self, message, value=None, err_estimate=None):
        super().__init__(message)
        self.value = value
        self.err_estimate = err_estimate


class FallbackWarning(UserWarning):
    """An evaluator delegated to another one near a singular configuration."""
