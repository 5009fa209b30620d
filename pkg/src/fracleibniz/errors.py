"""Exception hierarchy shared by all modules."""


class FracError(Exception):
    """Base class for errors raised by this package."""


class DomainError(FracError, ValueError):
    """Argument outside the mathematical domain of an operation (poles, t < t0, ...)."""


class SingularityError(DomainError):
    """Evaluation at a point where the quantity is singular, e.g. (t - t0)^(-a) at t = t0."""


class PreconditionError(FracError, ValueError):
    """Input violates a stated hypothesis (asymmetric matrix, mismatched t0, ...)."""


class EvaluationError(FracError, ArithmeticError):
    """Numerical evaluation failed or the parameter regime is unsupported."""


class SearchExhaustedError(FracError, RuntimeError):
    """A bounded search terminated without finding a witness."""


class RangeError(EvaluationError, OverflowError):
    """Result not representable in double precision."""
