"""Rate-memory bounds, gap constants and verification tools for coded caching."""

from .problem import (
    CapExceededError,
    CodedCachingError,
    DecodeError,
    DemandVector,
    DomainError,
    IndependenceError,
    NumericError,
    OverlapError,
    ProblemSize,
)

__version__ = "0.1.0"

__all__ = [
    "CapExceededError",
    "CodedCachingError",
    "DecodeError",
    "DemandVector",
    "DomainError",
    "IndependenceError",
    "NumericError",
    "OverlapError",
    "ProblemSize",
]
