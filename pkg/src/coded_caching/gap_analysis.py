"""Multiplicative-gap functions and their numerical maximisation.

``phi``, ``psi`` and ``eta`` are closed-form majorants of the ratio between
the achievable rate and the lower bounds in :mod:`coded_caching.bounds`.
Their suprema give the constants 2.315 (worst case) and 2.507 (average
case).  ``xi``/``theta`` are the ratios themselves for a concrete instance.

Maximisation is a dense grid scan followed by an optional derivative-free
polish (Nelder-Mead in 2-D, bounded Brent in 1-D) started at the best grid
point.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, special

from .bounds import (
    ProblemSize,
    avg_case_lower_secondbranch,
    corner_memory,
    pow1m,
    worst_case_lower_secondbranch,
    yma_envelope,
)
from .problem import DomainError, NumericError

# distance kept from open endpoints during polishing
GUARD = 1e-12
E_CONSTANT = 1.0 / (1.0 - math.exp(-1.0))


def _check_open_unit(name: str, x) -> None:
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)) or np.any(~(arr < 1.0)):
        raise DomainError(f"{name} must lie in (0, 1)")


def _check_ell(ell) -> int:
    if isinstance(ell, bool) or int(ell) != ell or ell < 1:
        raise DomainError(f"ell must be a positive integer, got {ell!r}")
    return int(ell)


# ---------------------------------------------------------------- phi

def _phi_numerator(a, ell: int):
    # ((ell+a)/(ell+1))**(ell/a) written via 1 - (1-a)/(ell+1)
    log_power = (ell / a) * np.log1p(-(1.0 - a) / (ell + 1))
    return a * (ell + 1) / ((1.0 - a) * ell) * -np.expm1(log_power)


def phi_denominator(a, ell: int):
    """``1 - (1-a) sum_{j<ell} 1/(ell - a j)`` by direct summation.

    Accepts an array of ``a``; the sum runs in descending-magnitude order.
    """
    _check_open_unit("a", a)
    ell = _check_ell(ell)
    a_arr = np.atleast_1d(np.asarray(a, dtype=float))
    j = np.arange(ell - 1, -1, -1, dtype=float)
    out = np.empty_like(a_arr)
    # chunk the a axis so the term matrix stays small
    chunk = max(1, 2_000_000 // ell)
    for s in range(0, a_arr.size, chunk):
        block = a_arr[s : s + chunk, None]
        out[s : s + chunk] = 1.0 - (1.0 - block[:, 0]) * np.sum(1.0 / (ell - block * j), axis=1)
    return out if np.ndim(a) else float(out[0])


def phi(a: float, ell: int) -> float:
    """Worst-case gap majorant ``phi(a, ell)`` for ``a in (0,1)``.

    The denominator sum is accumulated with :func:`math.fsum` (exactly rounded)
    so that scans out to ``ell = 10**4`` are reproducible to 1e-9.
    """
    _check_open_unit("a", a)
    ell = _check_ell(ell)
    a = float(a)
    terms = 1.0 / (ell - a * np.arange(ell - 1, -1, -1, dtype=float))
    den = 1.0 - (1.0 - a) * math.fsum(terms.tolist())
    if not den > 0.0:
        raise NumericError(f"phi denominator {den!r} <= 0 at a={a}, ell={ell}")
    return float(_phi_numerator(a, ell)) / den


def _phi_fast(a, ell: int):
    # sum_{i=1..ell} 1/(c+i) = digamma(c+ell+1) - digamma(c+1), c = ell(1-a)/a
    c = ell * (1.0 - a) / a
    s = (special.digamma(c + ell + 1.0) - special.digamma(c + 1.0)) / a
    return _phi_numerator(a, ell) / (1.0 - (1.0 - a) * s)


# ---------------------------------------------------------------- psi, eta

def psi_denominator(a, b):
    return 1.0 - (1.0 - a) * b / (1.0 - a + a * b) + (1.0 - a) / a * np.log1p(-a * (1.0 - b))


def psi(a, b):
    """Large-``ell`` majorant of ``phi`` with ``b`` standing for ``1/ell``.

    Vectorised over numpy arrays.
    """
    _check_open_unit("a", a)
    if np.any(~(np.asarray(b, dtype=float) > 0.0)):
        raise DomainError("b must be positive")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    num = a * (1.0 + b) / (1.0 - a) * -np.expm1(np.log1p(-b * (1.0 - a) / (1.0 + b)) / (a * b))
    den = psi_denominator(a, b)
    if np.any(~(den > 0.0)):
        raise NumericError("psi denominator is not positive")
    out = num / den
    return float(out) if out.ndim == 0 else out


def _eta_parts(u, v):
    log_p = (u / v) * np.log1p(-v)
    p = np.exp(log_p)
    first = u + v * -np.expm1(log_p)
    second = -np.expm1(np.log1p(-v * p / (u + v)) / v)
    den = p * (1.0 - (1.0 + u / 2.0) * p)
    return first * second, den


def eta(u, v):
    """Average-case gap majorant on ``u in (0,1]``, ``v in (0,1/2]``.

    Vectorised over numpy arrays.
    """
    u_arr = np.asarray(u, dtype=float)
    v_arr = np.asarray(v, dtype=float)
    if np.any(~(u_arr > 0.0)) or np.any(~(u_arr <= 1.0)):
        raise DomainError("u must lie in (0, 1]")
    if np.any(~(v_arr > 0.0)) or np.any(~(v_arr <= 0.5)):
        raise DomainError("v must lie in (0, 1/2]")
    num, den = _eta_parts(u_arr, v_arr)
    if np.any(~(den > 0.0)):
        raise NumericError("eta denominator underflowed or is not positive")
    out = num / den
    return float(out) if out.ndim == 0 else out


# ------------------------------------------------ instance ratios Xi, Theta

_envelope = lru_cache(maxsize=256)(yma_envelope)


def xi(ps: ProblemSize, m: float) -> float:
    """Worst-case ratio: chordal YMA envelope over the harmonic lower bound."""
    den = worst_case_lower_secondbranch(ps, float(m))
    if not den > 0:
        raise NumericError(f"worst-case lower bound {den!r} <= 0 at m={m}")
    return _envelope(ps, "worst")(m) / den


def theta(ps: ProblemSize, m: float) -> float:
    """Average-case ratio over the average-kind corner ladder."""
    den = avg_case_lower_secondbranch(ps, float(m))
    if not den > 0:
        raise NumericError(f"average-case lower bound {den!r} <= 0 at m={m}")
    return _envelope(ps, "avg")(m) / den


def xi_at_corners(ps: ProblemSize) -> list[tuple[int, float]]:
    """``[(ell, Xi(K, N, M_ell)) for ell = 1..nbar]``."""
    return [(ell, xi(ps, corner_memory(ps, ell, "worst"))) for ell in range(1, ps.nbar + 1)]


def theta_at_corners(ps: ProblemSize) -> list[tuple[int, float]]:
    """``[(ell, Theta(K, N, M~_ell)) for ell = 1..nbar]``."""
    return [(ell, theta(ps, corner_memory(ps, ell, "avg"))) for ell in range(1, ps.nbar + 1)]


def xi_corner_majorant(N: int, ell: int) -> float:
    """The worst-case corner ratio with the exponent ``nbar`` relaxed to ``N``.

    Written in the original ``(N, ell)`` variables; equals ``phi(ell/N, ell)``.
    """
    top = ell * (ell + 1) / (N - ell) * -math.expm1(N * math.log(ell * (N + 1) / ((ell + 1) * N)))
    bottom = ell - (N - ell) * math.fsum(1.0 / (N - j + 1) for j in range(1, ell + 1))
    return top / bottom


def theta_corner_majorant(N: int, ell: int) -> float:
    """The average-case corner ratio with the exponent ``nbar`` relaxed to ``N``.

    Written in the original ``(N, ell)`` variables; equals ``eta(ell/N, 1/N)``.
    """
    q = pow1m(1.0 / N, ell)
    top = ((ell + 1) / N - q / N) * (1.0 - pow1m(q / (ell + 1), N))
    bottom = q * (1.0 - (1.0 + ell / (2.0 * N)) * q)
    return top / bottom


# ---------------------------------------------------------- maximisation

@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_open: bool = True
    hi_open: bool = True

    def grid(self, step: float) -> np.ndarray:
        if step <= 0:
            raise DomainError("grid step must be positive")
        n = int(math.floor((self.hi - self.lo) / step + 1e-9))
        pts = self.lo + step * np.arange(n + 1)
        tol = 1e-9 * step
        keep = np.ones(pts.size, dtype=bool)
        if self.lo_open:
            keep &= pts > self.lo + tol
        if self.hi_open:
            keep &= pts < self.hi - tol
        pts = pts[keep]
        if not self.hi_open and pts.size and abs(pts[-1] - self.hi) <= tol:
            pts[-1] = self.hi
        return pts

    def guarded(self) -> tuple[float, float]:
        return (self.lo + GUARD if self.lo_open else self.lo,
                self.hi - GUARD if self.hi_open else self.hi)


Box = tuple[Interval, Interval]

PSI_BOX: Box = (Interval(0.0, 1.0), Interval(0.0, 1e-4))
ETA_BOX: Box = (Interval(0.0, 1.0, hi_open=False), Interval(0.0, 0.5, hi_open=False))
_NAMED = {"psi": (psi, PSI_BOX, (1e-3, 1e-6)), "eta": (eta, ETA_BOX, (1e-3, 1e-3))}


@dataclass
class MaximizationResult:
    argmax: tuple
    value: float
    evaluations: int
    method: str
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "argmax": list(self.argmax),
            "evaluations": self.evaluations,
            "method": self.method,
            **self.details,
        }


def maximize_2d(
    f: str | Callable,
    box: Box | None = None,
    grid_step: float | Sequence[float] | None = None,
    polish: bool = True,
) -> MaximizationResult:
    """Maximise ``f(x, y)`` over a rectangle.

    Parameters
    ----------
    f : {"psi", "eta"} or callable
        Callables must accept broadcast numpy arrays.
    box : pair of Interval, optional
        Defaults to the natural domain of the named function.
    grid_step : float or (float, float), optional
        Grid spacing per axis; defaults to (1e-3, 1e-6) for psi and 1e-3 for eta.
    polish : bool
        Run Nelder-Mead from the best grid point, kept ``GUARD`` away from
        open edges.
    """
    if isinstance(f, str):
        if f not in _NAMED:
            raise DomainError(f"unknown function {f!r}")
        func, default_box, default_step = _NAMED[f]
        box = box or default_box
        grid_step = grid_step or default_step
    else:
        func = f
        if box is None or grid_step is None:
            raise DomainError("box and grid_step are required for a custom function")
    steps = (grid_step, grid_step) if np.isscalar(grid_step) else tuple(grid_step)
    gx, gy = box[0].grid(steps[0]), box[1].grid(steps[1])
    X, Y = np.meshgrid(gx, gy, indexing="ij")
    vals = np.broadcast_to(np.asarray(func(X, Y), dtype=float), X.shape)
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    best_pt, best_val = (float(gx[i]), float(gy[j])), float(vals[i, j])
    evaluations = int(vals.size)
    if not polish:
        return MaximizationResult(best_pt, best_val, evaluations, "grid")

    (x_lo, x_hi), (y_lo, y_hi) = box[0].guarded(), box[1].guarded()
    span = np.array([x_hi - x_lo, y_hi - y_lo])
    origin = np.array([x_lo, y_lo])

    def objective(z):
        if np.any(z < 0.0) or np.any(z > 1.0):
            return math.inf
        p = origin + z * span
        return -float(func(p[0], p[1]))

    z0 = np.clip((np.array(best_pt) - origin) / span, 0.0, 1.0)
    dz = np.array(steps) / span
    simplex = [z0]
    for axis in range(2):
        e = np.zeros(2)
        e[axis] = dz[axis] if z0[axis] + dz[axis] <= 1.0 else -dz[axis]
        simplex.append(z0 + e)
    res = optimize.minimize(
        objective, z0, method="Nelder-Mead",
        options={"initial_simplex": np.array(simplex), "xatol": 1e-11, "fatol": 1e-15,
                 "maxiter": 4000, "maxfev": 8000},
    )
    evaluations += int(res.nfev)
    polished = tuple(float(c) for c in origin + np.clip(res.x, 0.0, 1.0) * span)
    polished_val = float(func(*polished))
    evaluations += 1
    if polished_val > best_val:
        best_pt, best_val = polished, polished_val
    return MaximizationResult(best_pt, best_val, evaluations, "grid+polish")


def _scan_phi_range(args) -> tuple[float, float, int, int]:
    ell_lo, ell_hi, grid_step, polish = args
    a_grid = Interval(0.0, 1.0).grid(grid_step)
    lo, hi = Interval(0.0, 1.0).guarded()
    best = None
    evaluations = 0
    for ell in range(ell_lo, ell_hi + 1):
        vals = _phi_fast(a_grid, ell)
        i = int(np.argmax(vals))
        evaluations += a_grid.size
        candidates = [float(a_grid[i])]
        if polish:
            res = optimize.minimize_scalar(
                lambda x: -float(_phi_fast(x, ell)),
                bounds=(max(lo, a_grid[i] - grid_step), min(hi, a_grid[i] + grid_step)),
                method="bounded", options={"xatol": 1e-12},
            )
            evaluations += int(res.nfev)
            candidates.append(float(res.x))
        for a in candidates:
            value = phi(a, ell)
            evaluations += 1
            if best is None or value > best[0]:
                best = (value, a, ell)
    return best[0], best[1], best[2], evaluations


def _worker_count(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("CODED_CACHING_WORKERS", "1"))
    return max(1, workers)


def scan_phi(
    ell_max: int = 10_000,
    grid_step: float = 1e-3,
    polish: bool = True,
    workers: int | None = None,
    ell_min: int = 1,
) -> MaximizationResult:
    """``max_{ell <= ell_max} max_a phi(a, ell)``.

    The grid stage uses a digamma closed form of the denominator sum; every
    reported value is recomputed with :func:`phi`.  Work can be split over
    processes by ``ell`` range; the max-reduction breaks ties towards the
    smallest ``ell`` so the result does not depend on the split.
    """
    ell_max = _check_ell(ell_max)
    workers = _worker_count(workers)
    bounds = np.linspace(ell_min - 1, ell_max, min(workers * 4, ell_max - ell_min + 1) + 1)
    bounds = np.unique(np.round(bounds).astype(int))
    chunks = [(int(lo) + 1, int(hi), grid_step, polish) for lo, hi in zip(bounds, bounds[1:])]
    if workers == 1 or len(chunks) == 1:
        parts = [_scan_phi_range(c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_scan_phi_range, chunks))
    value, a, ell, _ = max(parts, key=lambda p: (p[0], -p[2]))
    evaluations = sum(p[3] for p in parts)
    return MaximizationResult((a, ell), value, evaluations, "grid+polish" if polish else "grid")
