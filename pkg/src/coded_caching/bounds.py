"""Closed-form rate-memory bounds for the coded caching problem.

All memories and rates are normalised by the file size: a cache of ``m``
holds ``m`` files' worth of bits and a rate ``r`` means ``r`` files are
broadcast.  Every bound is defined on ``0 <= m < N`` and raises
:class:`DomainError` elsewhere.

The worst-case functions accept :class:`fractions.Fraction` memories and then
return exact rationals; everything involving powers of ``1 - 1/N`` is float.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from .problem import DomainError, ProblemSize

__all__ = [
    "ProblemSize",
    "CornerPointLadder",
    "PiecewiseLinearCurve",
    "worst_case_lower",
    "worst_case_lower_argmax",
    "worst_case_lower_secondbranch",
    "worst_first_branch",
    "worst_second_branch",
    "avg_case_lower",
    "avg_case_lower_secondbranch",
    "yma_upper",
    "corner_points",
    "yma_envelope",
]

Kind = Literal["worst", "avg"]


def _check_memory(ps: ProblemSize, m) -> None:
    if not (0 <= m < ps.N):
        raise DomainError(f"memory must lie in [0, N={ps.N}), got {m!r}")


def pow1m(x: float, e: float) -> float:
    """``(1 - x)**e`` evaluated as ``exp(e*log1p(-x))``; ``x`` in [0, 1]."""
    if e == 0:
        return 1.0
    if x >= 1.0:
        return 0.0
    return math.exp(e * math.log1p(-x))


def _harmonic_weight(N: int, k: int, exact: bool):
    return Fraction(k, N - k + 1) if exact else k / (N - k + 1)


def worst_first_branch(ps: ProblemSize, m, ell: int):
    """``ell - m*ell**2/N``."""
    return ell - m * ell * ell / ps.N


def worst_second_branch(ps: ProblemSize, m, ell: int):
    """``ell - m * sum_{k<=ell} k/(N-k+1)``."""
    exact = isinstance(m, Fraction)
    s = sum(_harmonic_weight(ps.N, k, exact) for k in range(1, ell + 1))
    return ell - m * s


def worst_case_lower_argmax(ps: ProblemSize, m):
    """Lower bound on the worst-case rate together with where it is attained.

    Returns
    -------
    (value, ell, branch)
        ``branch`` is 1 for ``ell - m ell^2/N`` and 2 for the harmonic branch.
        Ties go to the smallest ``ell``, then to branch 1.
    """
    _check_memory(ps, m)
    exact = isinstance(m, Fraction)
    best = None
    s = 0
    for ell in range(1, ps.nbar + 1):
        s += _harmonic_weight(ps.N, ell, exact)
        for branch, value in ((1, ell - m * ell * ell / ps.N), (2, ell - m * s)):
            if best is None or value > best[0]:
                best = (value, ell, branch)
    return best


def worst_case_lower(ps: ProblemSize, m):
    """Lower bound on the worst-case rate-memory tradeoff.

    The maximum over ``ell in 1..min(K, N)`` of both
    ``ell - m*ell**2/N`` and ``ell - m*sum_{k<=ell} k/(N-k+1)``.
    """
    return worst_case_lower_argmax(ps, m)[0]


def worst_case_lower_secondbranch(ps: ProblemSize, m):
    """``max_ell sum_{j<=ell} (1 - j m/(N-j+1))``, the harmonic branch alone.

    This is the piecewise-linear denominator of the worst-case gap ratio; its
    breakpoints are the worst-kind corner points.
    """
    _check_memory(ps, m)
    exact = isinstance(m, Fraction)
    best = None
    total = 0
    for j in range(1, ps.nbar + 1):
        total += 1 - m * _harmonic_weight(ps.N, j, exact)
        if best is None or total > best:
            best = total
    return best


def _miss_probability_sum(N: int, ell: int) -> float:
    # 1 - (1 - 1/N)**ell, expected fraction of the library hit by ell demands
    if N == 1:
        return 1.0
    return -math.expm1(ell * math.log1p(-1.0 / N))


def avg_case_lower(ps: ProblemSize, m: float) -> float:
    """Lower bound on the average-case rate-memory tradeoff.

    Maximum over ``ell in 1..K`` (all users, not only ``min(K, N)``) of
    ``(1-(1-1/N)**ell)(N - ell m)`` and
    ``(1-(1-1/N)**ell) N - ell(ell+1) m/(2N)``.
    """
    _check_memory(ps, m)
    m = float(m)
    N = ps.N
    best = -math.inf
    for ell in range(1, ps.K + 1):
        q = _miss_probability_sum(N, ell)
        best = max(best, q * (N - ell * m), q * N - ell * (ell + 1) * m / (2 * N))
    return best


def avg_case_lower_secondbranch(ps: ProblemSize, m: float) -> float:
    """``max_{ell <= nbar} sum_{k<=ell} [(1-1/N)**(k-1) - k m/N]``.

    Piecewise-linear denominator of the average-case gap ratio.
    """
    _check_memory(ps, m)
    m = float(m)
    N = ps.N
    best = -math.inf
    total = 0.0
    for k in range(1, ps.nbar + 1):
        total += pow1m(1.0 / N, k - 1) - k * m / N
        best = max(best, total)
    return best


def _yma(ps: ProblemSize, m: float) -> float:
    if m == 0:
        return float(ps.nbar)
    N = ps.N
    if m >= N:
        return 0.0
    x = m / N
    if x * ps.nbar < 1e-6:
        # (1-(1-x)**n)/x = n - C(n,2) x + O(x**2); avoids overflow of 1/x
        n = ps.nbar
        return (1.0 - x) * (n - n * (n - 1) / 2.0 * x)
    return (1.0 - x) / x * -math.expm1(ps.nbar * math.log1p(-x))


def yma_upper(ps: ProblemSize, m: float) -> float:
    """Achievable rate of decentralized caching, an upper bound on both tradeoffs.

    ``nbar`` at ``m = 0``, otherwise ``((N-m)/m) (1 - (1-m/N)**nbar)``.
    """
    _check_memory(ps, m)
    return _yma(ps, float(m))


@dataclass(frozen=True)
class CornerPointLadder:
    """Corner memories ``M_0 = N > M_1 > ... > M_nbar = 0``.

    ``points`` lists ``(ell, memory)`` for ``ell = 0..nbar``.
    """

    kind: Kind
    points: tuple[tuple[int, float], ...]

    def memory(self, ell: int) -> float:
        return self.points[ell][1]

    def __len__(self) -> int:
        return len(self.points)


def corner_memory(ps: ProblemSize, ell: int, kind: Kind) -> float:
    if not 0 <= ell <= ps.nbar:
        raise DomainError(f"corner index {ell} outside 0..{ps.nbar}")
    if ell == ps.nbar:
        return 0.0
    N = ps.N
    if kind == "worst":
        return (N - ell) / (ell + 1)
    if kind == "avg":
        return N / (ell + 1) * pow1m(1.0 / N, ell)
    raise DomainError(f"unknown ladder kind {kind!r}")


def corner_points(ps: ProblemSize, kind: Kind = "worst") -> CornerPointLadder:
    """Memories at which the piecewise-linear lower bound changes slope."""
    return CornerPointLadder(
        kind, tuple((ell, corner_memory(ps, ell, kind)) for ell in range(ps.nbar + 1))
    )


@dataclass(frozen=True)
class PiecewiseLinearCurve:
    """Linear interpolation between breakpoints sorted by memory.

    The domain is ``[first memory, last memory)``; the right end is open
    because the rate-memory problem is only defined for ``m < N``.
    """

    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        ms = [p[0] for p in self.breakpoints]
        if len(ms) < 2 or any(b <= a for a, b in zip(ms, ms[1:])):
            raise DomainError("breakpoints need at least two strictly increasing memories")

    @property
    def memories(self) -> np.ndarray:
        return np.array([p[0] for p in self.breakpoints])

    @property
    def rates(self) -> np.ndarray:
        return np.array([p[1] for p in self.breakpoints])

    def segment(self, m: float) -> int:
        """Index ``i`` with ``breakpoints[i][0] <= m < breakpoints[i+1][0]``."""
        ms = [p[0] for p in self.breakpoints]
        if not ms[0] <= m < ms[-1]:
            raise DomainError(f"{m!r} outside curve domain [{ms[0]}, {ms[-1]})")
        return bisect_right(ms, m) - 1

    def __call__(self, m: float) -> float:
        i = self.segment(m)
        (m0, r0), (m1, r1) = self.breakpoints[i], self.breakpoints[i + 1]
        # stays exact for Fraction breakpoints and memories
        return r0 + (m - m0) / (m1 - m0) * (r1 - r0)

    def evaluate(self, ms: Sequence[float] | np.ndarray) -> np.ndarray:
        ms = np.asarray(ms, dtype=float)
        if ms.size and (ms.min() < self.breakpoints[0][0] or ms.max() >= self.breakpoints[-1][0]):
            raise DomainError("memory grid leaves the curve domain")
        return np.interp(ms, self.memories, self.rates)


def yma_envelope(ps: ProblemSize, kind: Kind = "worst") -> PiecewiseLinearCurve:
    """Chordal upper envelope of :func:`yma_upper` over the corner ladder.

    Because the achievable rate is convex in ``m``, the chords through its
    values at consecutive corner points lie above it.  At ``M_0 = N`` the
    breakpoint takes the limiting rate 0.
    """
    ladder = corner_points(ps, kind)
    pts = [(mem, _yma(ps, mem)) for _, mem in reversed(ladder.points)]
    return PiecewiseLinearCurve(tuple(pts))
