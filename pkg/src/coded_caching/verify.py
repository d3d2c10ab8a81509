"""Property suites behind ``coded-caching verify``.

Each suite returns a list of :class:`Failure` records; an empty list means
every check passed.  Randomised checks draw from ``numpy.random.default_rng``
seeded by the caller.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import bounds, info_kit, schemes
from .entropy_lp import build_model, solve
from .problem import CodedCachingError, ProblemSize, all_demands

TOL = 1e-9
CORPUS_SIZES = tuple(ProblemSize(K, N) for K in (1, 2, 3) for N in (1, 2, 3))
LP_GRID = tuple(Fraction(x) for x in ("0", "1/4", "1/2", "3/4", "1", "3/2"))


@dataclass(frozen=True)
class Failure:
    suite: str
    check: str
    detail: str

    def to_dict(self) -> dict:
        return asdict(self)


def corpus() -> list[schemes.CacheScheme]:
    """MN placements for every ``K, N in {1, 2, 3}`` and every ``t``."""
    return [schemes.place(ps, t) for ps in CORPUS_SIZES for t in range(ps.K + 1)]


class _Recorder:
    def __init__(self, suite: str) -> None:
        self.suite = suite
        self.failures: list[Failure] = []

    def check(self, ok: bool, check: str, detail: Callable[[], str] | str = "") -> None:
        if not ok:
            self.failures.append(Failure(self.suite, check, detail() if callable(detail) else detail))


# ------------------------------------------------------------------ lemmas

def han_instances(seed: int, count: int = 1000) -> list[Failure]:
    rec = _Recorder("lemmas")
    rng = np.random.default_rng(seed)
    for i in range(count):
        pmf, parts, v = info_kit.random_han_instance(rng)
        for l in range(1, len(parts) + 1):
            lhs, rhs = info_kit.han_check(pmf, parts, v, l)
            rec.check(lhs <= rhs + TOL, "han", lambda: f"instance {i}, l={l}: {lhs} > {rhs}")
    return rec.failures


def expected_distinct_cases(limit: int = 10**6) -> list[tuple[int, int]]:
    """``(N, ell)`` pairs compared against enumeration.

    Every pair with ``N, ell >= 2`` and ``N**ell <= limit``, plus ``ell = 1``
    for ``N <= 1000`` and ``N = 1`` for ``ell <= 64``.
    """
    cases = [(N, 1) for N in range(1, 1001)] + [(1, ell) for ell in range(2, 65)]
    for ell in itertools.count(2):
        if 2**ell > limit:
            break
        N = 2
        while N**ell <= limit:
            cases.append((N, ell))
            N += 1
    return cases


def expected_distinct_agreement() -> list[Failure]:
    rec = _Recorder("lemmas")
    for N, ell in expected_distinct_cases():
        closed = info_kit.expected_distinct(N, ell, exact=True)
        counted = info_kit.expected_distinct(N, ell, method="enumerate", exact=True)
        rec.check(closed == counted, "expected_distinct", lambda: f"N={N}, ell={ell}: {closed} != {counted}")
    return rec.failures


def scheme_lemmas(scheme: schemes.CacheScheme) -> list[Failure]:
    rec = _Recorder("lemmas")
    ps, F = scheme.ps, scheme.F
    tag = f"K={ps.K},N={ps.N},t={scheme.t}"
    ctx = info_kit.SchemeEntropyContext(scheme)
    for r in range(1, ps.N + 1):
        for S in itertools.combinations(range(1, ps.N + 1), r):
            h = ctx.entropy(f"W{i}" for i in S)
            rec.check(abs(h - r * F) <= TOL, "uniformity", lambda: f"{tag} S={S}: {h}")
    for d in all_demands(ps.N, ps.K):
        for ell in range(1, ps.nbar + 1):
            bound, achieved = info_kit.lemma1_check(ctx, d, ell)
            rec.check(achieved >= bound - TOL, "lemma1", lambda: f"{tag} d={d} ell={ell}: {achieved} < {bound}")
    for ell in range(1, ps.nbar + 1):
        res = info_kit.lemma3_alphas(ctx, ell)
        total = sum(res.values)
        rec.check(total <= min(res.bound_a, res.bound_b) + TOL, "lemma3",
                  lambda: f"{tag} ell={ell}: {total} > min({res.bound_a}, {res.bound_b})")
    for ell in range(1, ps.K + 1):
        res = info_kit.lemma4_betas(ctx, ell)
        total = sum(res.values)
        rec.check(total <= min(res.bound_a, res.bound_b) + TOL, "lemma4",
                  lambda: f"{tag} ell={ell}: {total} > min({res.bound_a}, {res.bound_b})")
    return rec.failures


def suite_lemmas(seed: int = 0) -> list[Failure]:
    failures = han_instances(seed) + expected_distinct_agreement()
    for scheme in corpus():
        failures += scheme_lemmas(scheme)
    return failures


# ----------------------------------------------------------------- schemes

def suite_schemes(seed: int = 0) -> list[Failure]:
    rec = _Recorder("schemes")
    for scheme in corpus():
        ps, t = scheme.ps, scheme.t
        tag = f"K={ps.K},N={ps.N},t={t}"
        rec.check(scheme.memory_used == Fraction(ps.N * t, ps.K), "memory", tag)
        for suppress in (False, True):
            try:
                worst, avg = schemes.measure_rates(scheme, suppress, seed=seed)
            except CodedCachingError as exc:
                rec.check(False, "decode", f"{tag} suppress={suppress}: {exc}")
                continue
            if not suppress:
                rec.check(worst == Fraction(ps.K - t, t + 1), "mn_rate", lambda: f"{tag}: {worst}")
            m = scheme.memory_used
            if m < ps.N:
                lower = bounds.worst_case_lower(ps, m)
                rec.check(worst >= lower - TOL, "worst_lower",
                          lambda: f"{tag} suppress={suppress}: {worst} < {lower}")
                lower_avg = bounds.avg_case_lower(ps, float(m))
                rec.check(avg >= lower_avg - TOL, "avg_lower",
                          lambda: f"{tag} suppress={suppress}: {avg} < {lower_avg}")
    return rec.failures


# ---------------------------------------------------------------------- lp

def lp_sandwich(ps: ProblemSize = ProblemSize(2, 2), grid=LP_GRID, symmetry: bool = False):
    """Worst-case LP values with lower bound and achievable rate on ``grid``.

    Returns
    -------
    list of ``(M, lower, lp, achievable)`` with exact ``lp`` and ``achievable``.
    """
    curve = schemes.achievable_curve(ps, suppress=True)
    out = []
    for M in grid:
        lp = solve(build_model(ps, M), symmetry=symmetry).optimal_rate
        out.append((M, bounds.worst_case_lower(ps, M), lp, curve(M)))
    return out


def suite_lp(seed: int = 0) -> list[Failure]:
    rec = _Recorder("lp")
    ps = ProblemSize(2, 2)
    rows = lp_sandwich(ps)
    for M, lower, lp, upper in rows:
        rec.check(lower <= lp <= upper, "sandwich", lambda: f"M={M}: {lower} <= {lp} <= {upper}")
        for ell in range(1, ps.nbar + 1):
            for branch in (bounds.worst_first_branch, bounds.worst_second_branch):
                value = branch(ps, M, ell)
                rec.check(lp >= value, "dominance", lambda: f"M={M} ell={ell} {branch.__name__}: {lp} < {value}")
    values = [lp for _, _, lp, _ in rows]
    rec.check(all(a >= b for a, b in zip(values, values[1:])), "monotone", str(values))
    rec.check(values[0] == 2, "no_cache", str(values[0]))

    for M in LP_GRID:
        model = build_model(ps, M)
        a, b = solve(model, "bland", symmetry=True), solve(model, "dantzig", symmetry=True)
        rec.check(a.optimal_rate == b.optimal_rate == values[LP_GRID.index(M)], "pivot_rules",
                  lambda: f"M={M}: {a.optimal_rate}, {b.optimal_rate}")
        avg = solve(build_model(ps, M, objective="avg"), symmetry=True).optimal_rate
        lower = bounds.avg_case_lower(ps, float(M))
        rec.check(avg >= lower - TOL, "avg_dominance", lambda: f"M={M}: {avg} < {lower}")
        rec.check(avg <= values[LP_GRID.index(M)], "avg_below_worst", lambda: f"M={M}: {avg}")

    rng = np.random.default_rng(seed)
    for M in sorted({Fraction(int(x), 12) for x in rng.integers(0, 12, size=4)}):
        lp = solve(build_model(ProblemSize(1, 1), M, [(1,)])).optimal_rate
        rec.check(lp == 1 - M, "single_user", lambda: f"M={M}: {lp}")
    return rec.failures


SUITES: dict[str, Callable[[int], list[Failure]]] = {
    "lemmas": suite_lemmas,
    "schemes": suite_schemes,
    "lp": suite_lp,
}


def run(suite: str, seed: int = 0) -> list[Failure]:
    """Run one suite, or every suite for ``"all"``."""
    if suite == "all":
        return [f for name in SUITES for f in SUITES[name](seed)]
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    return SUITES[suite](seed)
