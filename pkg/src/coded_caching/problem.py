"""Problem dimensions, demand vectors and the exception hierarchy shared by
every module of the package."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence


class CodedCachingError(Exception):
    """Base class for all package errors."""


class DomainError(CodedCachingError, ValueError):
    """An argument lies outside the domain of the function."""


class NumericError(CodedCachingError, ArithmeticError):
    """A quantity that must be positive by construction came out non-positive."""


class CapExceededError(CodedCachingError):
    """An exhaustive enumeration would exceed its desk-scale cap."""


class DecodeError(CodedCachingError):
    """A receiver failed to reconstruct its demanded file."""


class IndependenceError(CodedCachingError):
    """Random variables that must be mutually independent are not."""


class OverlapError(CodedCachingError, ValueError):
    """Variable sets that must be disjoint intersect."""


@dataclass(frozen=True)
class ProblemSize:
    """A coded caching instance with ``K`` users and ``N`` files."""

    K: int
    N: int

    def __post_init__(self) -> None:
        for name in ("K", "N"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise DomainError(f"{name} must be a positive integer, got {value!r}")

    @property
    def nbar(self) -> int:
        """Number of demands that can be distinct, ``min(K, N)``."""
        return min(self.K, self.N)


@dataclass(frozen=True)
class DemandVector:
    """Demands ``(d_1, ..., d_K)`` with files numbered from 1."""

    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(int(x) for x in self.entries))
        if not self.entries:
            raise DomainError("a demand vector needs at least one entry")
        if min(self.entries) < 1:
            raise DomainError(f"demands are numbered from 1: {self.entries}")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def validate(self, ps: ProblemSize) -> None:
        if len(self.entries) != ps.K:
            raise DomainError(f"expected {ps.K} demands, got {len(self.entries)}")
        if max(self.entries) > ps.N:
            raise DomainError(f"demand exceeds library size N={ps.N}: {self.entries}")

    def distinct_count(self, ell: int | None = None) -> int:
        """Number of distinct files among the first ``ell`` demands."""
        if ell is None:
            ell = len(self.entries)
        if not 0 <= ell <= len(self.entries):
            raise DomainError(f"prefix length {ell} out of range")
        return len(set(self.entries[:ell]))

    def __str__(self) -> str:
        return ",".join(map(str, self.entries))


def as_demand(d: DemandVector | Sequence[int]) -> DemandVector:
    return d if isinstance(d, DemandVector) else DemandVector(tuple(d))


def all_demands(N: int, length: int) -> Iterator[DemandVector]:
    """All ``N**length`` demand vectors, lexicographic order (repetitions allowed)."""
    for entries in itertools.product(range(1, N + 1), repeat=length):
        yield DemandVector(entries)


def distinct_demands(N: int, length: int) -> Iterator[DemandVector]:
    """Ordered demand vectors of the given length with pairwise distinct entries."""
    for entries in itertools.permutations(range(1, N + 1), length):
        yield DemandVector(entries)
