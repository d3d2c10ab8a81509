import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coded_caching import bounds, gap_analysis as ga
from coded_caching.problem import DomainError, ProblemSize

P = ProblemSize

# 50-digit mpmath evaluations of the closed forms
PHI_025_7 = 2.308135802051013133791464257114882737715253757303
PHI_03_1000 = 2.3068281406036412522830134952669436497668887961187
PSI_05_1EM5 = 2.0600238315305695484208248179405800049339973839908
ETA_1_05 = 1.4055555555555555555555555555555555555555555555556
ETA_03_001 = 2.4944436853418265752554745865756584324360915418672
# dense 1e-5 grid of the ell = 1 closed form 2/(1-a) (1 - ((1+a)/2)**(1/a))
PHI1_MAX = 2.309095211134998


@pytest.mark.parametrize(
    "a,ell,expected",
    [(0.5, 1, 1.75), (0.25, 7, PHI_025_7), (0.3, 1000, PHI_03_1000)],
)
def test_phi_values(a, ell, expected):
    assert ga.phi(a, ell) == pytest.approx(expected, rel=1e-12)


def test_psi_and_eta_values():
    assert ga.psi(0.5, 1e-5) == pytest.approx(PSI_05_1EM5, rel=1e-12)
    assert ga.eta(1.0, 0.5) == pytest.approx(ETA_1_05, rel=1e-14)
    assert ga.eta(0.3, 0.01) == pytest.approx(ETA_03_001, rel=1e-12)


@pytest.mark.parametrize("a", [0.0, 1.0, -0.2, 1.5])
def test_phi_open_domain(a):
    with pytest.raises(DomainError):
        ga.phi(a, 3)


@pytest.mark.parametrize("u,v", [(0.0, 0.1), (1.1, 0.1), (0.5, 0.0), (0.5, 0.6)])
def test_eta_domain(u, v):
    with pytest.raises(DomainError):
        ga.eta(u, v)


def test_phi_rejects_bad_ell():
    for ell in (0, 2.5, -1):
        with pytest.raises(DomainError):
            ga.phi(0.5, ell)


@pytest.mark.parametrize("ell", [1, 2, 17, 500, 3000])
def test_fast_phi_matches_direct(ell):
    a = np.linspace(0.01, 0.99, 99)
    direct = np.array([ga.phi(x, ell) for x in a])
    assert np.allclose(ga._phi_fast(a, ell), direct, rtol=1e-10)


def test_denominators_positive_on_grid():
    a = ga.Interval(0.0, 1.0).grid(1e-3)
    for ell in range(1, 1001):
        assert np.all(ga.phi_denominator(a, ell) > 0)
    A, B = np.meshgrid(a, np.linspace(1e-7, 1e-4, 50))
    assert np.all(ga.psi_denominator(A, B) > 0)
    U, V = np.meshgrid(np.linspace(1e-3, 1, 200), np.linspace(1e-3, 0.5, 200))
    assert np.all(ga._eta_parts(U, V)[1] > 0)


def test_phi_max_at_ell_one():
    res = ga.scan_phi(1)
    assert res.value == pytest.approx(PHI1_MAX, abs=1e-9)
    assert res.value >= PHI1_MAX - 1e-12
    assert res.argmax[0] == pytest.approx(0.18327, abs=1e-3)


def test_scan_phi_is_partition_independent():
    serial = ga.scan_phi(200, workers=1)
    parallel = ga.scan_phi(200, workers=3)
    assert serial.value == parallel.value
    assert serial.argmax == parallel.argmax


def test_scan_phi_nondecreasing_in_ell_max():
    values = [ga.scan_phi(n, polish=False).value for n in (1, 5, 50, 200)]
    assert values == sorted(values)


@pytest.mark.parametrize("ell", [2, 3, 10, 100, 999])
def test_psi_dominates_phi(ell):
    a = ga.Interval(0.0, 1.0).grid(1e-2)
    phis = np.array([ga.phi(x, ell) for x in a])
    assert np.all(ga.psi(a, 1.0 / ell) >= phis - 1e-9)


def test_maximize_constant_function():
    box = (ga.Interval(0.0, 1.0), ga.Interval(0.0, 1.0))
    res = ga.maximize_2d(lambda x, y: np.full(np.shape(x), 3.5), box, 0.1)
    assert res.value == 3.5
    assert 0 < res.argmax[0] < 1 and 0 < res.argmax[1] < 1


def test_maximize_quadratic_recovers_peak():
    box = (ga.Interval(0.0, 1.0), ga.Interval(0.0, 1.0))
    res = ga.maximize_2d(lambda x, y: 1 - (x - 0.3137) ** 2 - (y - 0.777) ** 2, box, 0.05)
    assert res.argmax == pytest.approx((0.3137, 0.777), abs=1e-5)
    assert res.method == "grid+polish"


def test_maximize_result_value_matches_argmax():
    for name, func in (("psi", ga.psi), ("eta", ga.eta)):
        res = ga.maximize_2d(name)
        assert func(*res.argmax) == pytest.approx(res.value, rel=1e-12)


def test_interval_grid_excludes_open_ends():
    g = ga.Interval(0.0, 1.0).grid(0.25)
    assert g.tolist() == [0.25, 0.5, 0.75]
    g = ga.Interval(0.0, 0.5, hi_open=False).grid(0.25)
    assert g.tolist() == [0.25, 0.5]


@pytest.mark.parametrize("K,N", [(2, 2), (4, 10), (16, 64), (7, 3), (1, 5)])
def test_xi_last_corner_is_one(K, N):
    assert ga.xi_at_corners(P(K, N))[-1][1] == pytest.approx(1.0, abs=1e-12)


def test_xi_exact_when_single_demand():
    assert ga.xi_at_corners(P(1, 1)) == [(1, 1.0)]


def test_xi_corners_below_phi_max():
    ps = P(16, 64)
    for ell, value in ga.xi_at_corners(ps)[:-1]:
        assert value <= ga.scan_phi(ell, ell_min=ell).value + 1e-9


def test_theta_corners_below_eta():
    ps = P(16, 64)
    for ell, value in ga.theta_at_corners(ps)[:-1]:
        assert value <= ga.eta(ell / 64, 1 / 64) + 1e-9


@pytest.mark.parametrize("N,ell", [(64, 1), (64, 15), (10, 3), (1000, 999), (5, 4)])
def test_corner_majorants_change_of_variables(N, ell):
    assert ga.xi_corner_majorant(N, ell) == pytest.approx(ga.phi(ell / N, ell), rel=1e-10)
    assert ga.theta_corner_majorant(N, ell) == pytest.approx(ga.eta(ell / N, 1 / N), rel=1e-10)


@pytest.mark.parametrize("K,N", [(2, 2), (4, 10), (16, 64), (50, 50), (100, 10)])
def test_chain_consistency(K, N, phi_scan_value, eta_max_value):
    ps = P(K, N)
    assert max(v for _, v in ga.xi_at_corners(ps)) <= phi_scan_value + 1e-9
    assert max(v for _, v in ga.theta_at_corners(ps)) <= max(eta_max_value, ga.E_CONSTANT) + 1e-9


@pytest.fixture(scope="module")
def phi_scan_value():
    return ga.scan_phi(10_000).value


@pytest.fixture(scope="module")
def eta_max_value():
    return ga.maximize_2d("eta").value


@pytest.mark.parametrize("K,N", [(3, 5), (16, 64), (10, 10), (20, 4)])
def test_xi_quasiconvex_on_segments(K, N):
    ps = P(K, N)
    corners = [m for _, m in bounds.corner_points(ps, "worst").points]
    for hi, lo in zip(corners[1:-1], corners[2:]):
        edge = max(ga.xi(ps, lo), ga.xi(ps, hi))
        for m in np.linspace(lo, hi, 19)[1:-1]:
            assert ga.xi(ps, m) <= edge + 1e-9


@pytest.mark.parametrize("K,N", [(3, 5), (16, 64), (10, 10)])
def test_xi_constant_on_last_interval(K, N):
    ps = P(K, N)
    m1 = bounds.corner_memory(ps, 1, "worst")
    ref = ga.xi(ps, m1)
    for m in np.linspace(m1, N, 12, endpoint=False):
        assert ga.xi(ps, m) == pytest.approx(ref, rel=1e-9)


@given(st.integers(1, 30), st.integers(1, 30), st.floats(0.0, 1.0, exclude_max=True))
def test_ratios_at_least_one(K, N, frac):
    ps = P(K, N)
    m = frac * N
    assert ga.xi(ps, m) >= 1 - 1e-9
    assert ga.theta(ps, m) >= 1 - 1e-9


@given(st.floats(1e-3, 0.999), st.integers(2, 400))
def test_psi_dominates_phi_property(a, ell):
    assert ga.psi(a, 1.0 / ell) >= ga.phi(a, ell) - 1e-9


def test_e_constant():
    assert ga.E_CONSTANT == pytest.approx(1.5819767068693265, rel=1e-15)
    assert math.isclose(ga.E_CONSTANT, 1 / (1 - math.exp(-1)))
