"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line.  Run with
``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from coded_caching import bounds, cli, gap_analysis as ga, schemes, verify
from coded_caching.entropy_lp import build_model, solve
from coded_caching.problem import ProblemSize, all_demands

P = ProblemSize
E_BOUND = 1.582

# collected by conftest.py and repeated in the terminal summary
LINES: dict[int, str] = {}


def report(number: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    LINES[number] = line
    print("\n" + line, flush=True)
    assert ok, detail


def cli_json(argv):
    import contextlib
    import io

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(argv)
    assert code == 0
    return buf.getvalue()


def test_criterion_01_phi_and_psi_constant():
    t0 = time.perf_counter()
    scan = json.loads(cli_json(["gap", "scan-phi", "--ell-max", "10000"]))
    psi_max = json.loads(cli_json(["gap", "max-psi"]))
    elapsed = time.perf_counter() - t0
    ok = 2.0 < scan["value"] <= 2.315 + 1e-6 and psi_max["value"] <= 2.315 + 1e-6 and elapsed <= 300
    report(1, ok, f"max phi = {scan['value']:.9f}, max psi = {psi_max['value']:.9f}, {elapsed:.1f}s")


def test_criterion_02_eta_constant():
    t0 = time.perf_counter()
    res = json.loads(cli_json(["gap", "max-eta"]))
    elapsed = time.perf_counter() - t0
    ok = res["value"] <= 2.507 + 1e-6 and elapsed <= 60
    report(2, ok, f"max eta = {res['value']:.9f}, {elapsed:.2f}s")


def single_demand_pairs():
    return [(1, N) for N in range(1, 26)] + [(K, 1) for K in range(2, 27)]


def test_criterion_03_single_demand_theta():
    pairs = single_demand_pairs()
    assert len(pairs) == 50 and all(P(K, N).nbar == 1 for K, N in pairs)
    corner = max(v for K, N in pairs for _, v in ga.theta_at_corners(P(K, N)))
    # the claim covers every memory, so also sweep a grid
    sweep = max(ga.theta(P(K, N), m) for K, N in pairs for m in np.linspace(0, N, 64, endpoint=False))
    ok = corner <= E_BOUND + 1e-9 and sweep <= E_BOUND + 1e-9
    report(3, ok, f"max corner Theta = {corner:.12f}, max over memory grid = {sweep:.12f}")


def test_criterion_04_last_corner_identity():
    worst = max(
        abs(ga.xi(P(K, N), bounds.corner_memory(P(K, N), P(K, N).nbar, "worst")) - 1.0)
        for K in range(1, 21)
        for N in range(1, 21)
    )
    report(4, worst <= 1e-12, f"max |Xi(M_nbar) - 1| = {worst:.3e} over 400 instances")


def test_criterion_05_finite_instance_gap():
    t0 = time.perf_counter()
    xi_max = theta_max = 0.0
    for K in range(1, 101):
        for N in range(1, 101):
            ps = P(K, N)
            xi_max = max(xi_max, max(v for _, v in ga.xi_at_corners(ps)))
            theta_max = max(theta_max, max(v for _, v in ga.theta_at_corners(ps)))
    elapsed = time.perf_counter() - t0
    ok = xi_max <= 2.315 + 1e-6 and theta_max <= 2.507 + 1e-6 and elapsed <= 300
    report(5, ok, f"max Xi = {xi_max:.9f}, max Theta = {theta_max:.9f}, {elapsed:.1f}s")


def test_criterion_06_figure_data():
    rows = [line.split(",") for line in cli_json(["bounds", "--K", "16", "--N", "64"]).splitlines()]
    header, data = rows[0], np.array(rows[1:], dtype=float)
    col = {name: data[:, i] for i, name in enumerate(header)}
    tol = 1e-9
    sandwich = bool(
        np.all(col["worst_lower"] <= col["yma"] + tol)
        and np.all(col["yma"] <= col["yma_envelope_worst"] + tol)
        and np.all(col["avg_lower"] <= col["yma"] + tol)
        and np.all(col["yma"] <= col["yma_envelope_avg"] + tol)
    )
    decreasing = all(np.all(np.diff(col[c]) <= tol) for c in header[1:])
    env = col["yma_envelope_worst"]
    slopes = np.diff(env) / np.diff(col["M"])
    convex = bool(np.all(np.diff(slopes) >= -1e-7))
    endpoints = all(col[c][0] == 16 for c in ("worst_lower", "yma", "yma_envelope_worst", "yma_envelope_avg"))
    ok = len(data) == 1024 and sandwich and decreasing and convex and endpoints
    report(6, ok, f"rows={len(data)} sandwich={sandwich} decreasing={decreasing} convex={convex} endpoints={endpoints}")


def test_criterion_07_lemma_suite(seed):
    t0 = time.perf_counter()
    failures = verify.suite_lemmas(seed)
    elapsed = time.perf_counter() - t0
    cases = len(verify.expected_distinct_cases())
    ok = not failures and elapsed <= 180
    report(7, ok, f"{len(failures)} failures (1000 Han instances, {cases} E[kappa] cases, corpus lemmas), {elapsed:.1f}s")


def test_criterion_08_scheme_correctness(seed):
    rng = np.random.default_rng(seed)
    decoded = 0
    for scheme in verify.corpus():
        for suppress in (False, True):
            for d in all_demands(scheme.ps.N, scheme.ps.K):
                schemes.deliver(scheme, d, schemes.random_files(scheme, rng), suppress)
                decoded += 1
    ps = P(2, 2)
    worst, _ = schemes.measure_rates(schemes.place(ps, 1), seed=seed)
    lower = bounds.worst_case_lower(ps, Fraction(1))
    ok = worst == Fraction(1, 2) and worst >= lower and worst == lower
    report(8, ok, f"{decoded} deliveries decoded; worst rate (2,2,t=1) = {worst}, lower bound = {lower}")


def test_criterion_09_lp_sandwich():
    t0 = time.perf_counter()
    rows = verify.lp_sandwich(P(2, 2), verify.LP_GRID)
    elapsed = time.perf_counter() - t0
    sandwich = all(lo <= lp <= up for _, lo, lp, up in rows)
    ok = sandwich and rows[0][2] == 2 and elapsed <= 120
    summary = ", ".join(f"M={m}: {lo} <= {lp} <= {up}" for m, lo, lp, up in rows)
    report(9, ok, f"{summary}; {elapsed:.1f}s")


def test_criterion_10_psi_dominates_phi():
    a = np.linspace(0.0, 1.0, 1002)[1:-1]
    worst = math.inf
    for ell in range(2, 1001):
        phis = ga._phi_numerator(a, ell) / ga.phi_denominator(a, ell)
        worst = min(worst, float(np.min(ga.psi(a, 1.0 / ell) - phis)))
    report(10, worst >= -1e-9, f"min psi(a,1/ell) - phi(a,ell) = {worst:.3e} over 1000 x 999 points")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
