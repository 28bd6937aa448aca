"""Exception hierarchy shared across the package."""


class ApvError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgument(ApvError, ValueError):
    pass


class UnsupportedOrder(ApvError, ValueError):
    """A derivative of higher order than the integrand provides was requested."""


class PoleOutsidePuncture(ApvError, ValueError):
    """The cutoff does not fit inside the integration interval."""


class OrderTooLow(ApvError, ValueError):
    pass


class StencilError(ApvError, ValueError):
    """A finite-difference stencil in the pole location left the valid region."""


class AccuracyFailure(ApvError, ArithmeticError):
    """Quadrature did not reach the requested tolerance within its budget.

    ``value`` and ``abs_error_estimate`` carry the best estimate obtained.
    """

    def __init__(self, message, value=float("nan"), abs_error_estimate=float("inf"), evaluations=0):
        super().__init__(message)
        self.value = value
        self.abs_error_estimate = abs_error_estimate
        self.evaluations = evaluations


class NotPowerLaw(ApvError, ValueError):
    pass


class InsufficientData(ApvError, ValueError):
    pass


class IllConditionedFit(ApvError, ArithmeticError):
    def __init__(self, message, condition_estimate):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class DomainError(ApvError, ValueError):
    pass


class LightConeSingularity(DomainError):
    pass


class RegimeBoundary(DomainError):
    """tau == 2z: the pole sits exactly on the integration endpoint."""


class ExprSyntaxError(ApvError, ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownIdentifier(ExprSyntaxError):
    pass


class UnboundParameter(ApvError, ValueError):
    pass


class EvaluationFailure(ApvError, ArithmeticError):
    """Runtime math error while evaluating an integrand (carries the offending x)."""

    def __init__(self, message, x=None):
        super().__init__(message if x is None else f"{message} at x={x!r}")
        self.x = x
