"""Fractional Leibniz-rule verification: exact operators on polynomials,
gamma-ratio matrices, sampled-function schemes and a spectral Galerkin solver."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DomainError,
    EvaluationError,
    FracError,
    PreconditionError,
    RangeError,
    SearchExhaustedError,
    SingularityError,
)

__all__ = [
    "DomainError",
    "EvaluationError",
    "FracError",
    "PreconditionError",
    "RangeError",
    "SearchExhaustedError",
    "SingularityError",
    "__version__",
]
