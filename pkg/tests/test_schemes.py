import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coded_caching import bounds, schemes
from coded_caching.problem import DecodeError, DomainError, ProblemSize, all_demands

P = ProblemSize
CORPUS = [(K, N, t) for K in (1, 2, 3) for N in (1, 2, 3) for t in range(K + 1)]


def test_colex_order():
    assert schemes.colex_subsets(4, 2) == ((1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4))
    assert schemes.colex_subsets(3, 0) == ((),)


@pytest.mark.parametrize("K,N,t", [(2, 2, 0), (3, 2, 3), (2, 2, 1), (4, 3, 2)])
def test_placement_memory(K, N, t):
    scheme = schemes.place(P(K, N), t)
    assert scheme.memory_used == Fraction(N * t, K)
    for k in range(1, K + 1):
        assert scheme.cache_bits(k) == (N * math.comb(K - 1, t - 1) * scheme.subfile_bits if t else 0)
        assert scheme.cache_bits(k) <= scheme.F * scheme.memory_used


def test_placement_k2_n2_t1():
    scheme = schemes.place(P(2, 2), 1)
    assert scheme.F == 2 and scheme.subfile_bits == 1
    # each cache holds one bit of each file
    assert scheme.placement[1] == ((1, (1,)), (2, (1,)))
    caches = schemes.cache_contents(scheme, [0b10, 0b01])
    assert caches == [0b10, 0b01]


def test_divisibility_error():
    with pytest.raises(DomainError):
        schemes.place(P(3, 2), 1, F=4)
    with pytest.raises(DomainError):
        schemes.place(P(3, 2), 4)


def test_single_xor_block():
    scheme = schemes.place(P(2, 2), 1)
    tr = schemes.deliver(scheme, (1, 2), [0b10, 0b01])
    assert len(tr.blocks) == 1 and tr.total_bits == 1
    assert tr.rate == Fraction(1, 2)
    assert tr.dump() == "subset=1,2 bits=0"


def test_full_caching_sends_nothing():
    scheme = schemes.place(P(3, 2), 3)
    for d in all_demands(2, 3):
        tr = schemes.deliver(scheme, d, [1, 0])
        assert tr.total_bits == 0
    assert schemes.measure_rates(scheme) == (0, 0)


def test_no_cache_with_suppression_sends_distinct_files():
    scheme = schemes.place(P(2, 2), 0)
    for d in all_demands(2, 2):
        tr = schemes.deliver(scheme, d, [1, 0], suppress=True)
        assert tr.rate == d.distinct_count()
    assert schemes.measure_rates(scheme, suppress=True)[0] == 2


@pytest.mark.parametrize("K,N,t", CORPUS)
def test_corpus_decodes_every_demand(K, N, t):
    scheme = schemes.place(P(K, N), t)
    rng = np.random.default_rng(K * 100 + N * 10 + t)
    for suppress in (False, True):
        for d in all_demands(N, K):
            schemes.deliver(scheme, d, schemes.random_files(scheme, rng), suppress)


@pytest.mark.parametrize("K,N,t", CORPUS)
def test_corpus_rates(K, N, t):
    ps = P(K, N)
    scheme = schemes.place(ps, t)
    worst, avg = schemes.measure_rates(scheme)
    assert worst == Fraction(K - t, t + 1)
    assert avg == worst
    sworst, savg = schemes.measure_rates(scheme, suppress=True)
    assert sworst <= worst and savg <= avg
    if scheme.memory_used < N:
        assert sworst >= bounds.worst_case_lower(ps, scheme.memory_used)
        assert savg >= bounds.avg_case_lower(ps, float(scheme.memory_used)) - 1e-12


def test_mn_k2_n2_t1_is_tight():
    ps = P(2, 2)
    worst, _ = schemes.measure_rates(schemes.place(ps, 1))
    assert worst == Fraction(1, 2) == bounds.worst_case_lower(ps, Fraction(1))


def test_corrupted_transcript_fails_decoding():
    scheme = schemes.place(P(3, 3), 1)
    files = [0b101, 0b011, 0b110]
    tr = schemes.encode(scheme, (1, 2, 3), files)
    (T, bits), *rest = tr.blocks
    bad = schemes.DeliveryTranscript(tr.demand, ((T, bits ^ 1), *rest), tr.block_bits, tr.F)
    caches = schemes.cache_contents(scheme, files)
    assert any(schemes.decode(scheme, bad, k, caches[k - 1]) != files[k - 1] for k in (1, 2, 3))


def test_measure_rates_needs_samples_beyond_cap():
    scheme = schemes.place(P(7, 8), 0)
    with pytest.raises(Exception):
        schemes.measure_rates(scheme)
    worst, avg = schemes.measure_rates(scheme, suppress=True, samples=20, seed=1)
    assert 1 <= avg <= worst <= 7


def test_achievable_curve_is_convex_and_decreasing():
    curve = schemes.achievable_curve(P(3, 3), suppress=True)
    ms, rs = curve.memories, curve.rates
    assert np.all(np.diff(rs) <= 0)
    slopes = np.diff(rs) / np.diff(ms)
    assert np.all(np.diff(slopes) >= -1e-12)
    assert curve(Fraction(0)) == 3


def test_lower_convex_hull_drops_interior_points():
    hull = schemes.lower_convex_hull([(0, 2), (1, 1.5), (2, 0), (1, 0.5)])
    assert hull == [(0, 2), (1, 0.5), (2, 0)]


@given(
    st.integers(1, 4),
    st.integers(1, 4),
    st.data(),
)
def test_random_instances_decode(K, N, data):
    t = data.draw(st.integers(0, K))
    mult = data.draw(st.integers(1, 3))
    scheme = schemes.place(P(K, N), t, math.comb(K, t) * mult)
    d = tuple(data.draw(st.lists(st.integers(1, N), min_size=K, max_size=K)))
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    suppress = data.draw(st.booleans())
    tr = schemes.deliver(scheme, d, schemes.random_files(scheme, rng), suppress)
    expected = math.comb(K, t + 1) * scheme.subfile_bits
    if suppress:
        assert tr.total_bits <= expected
    else:
        assert tr.total_bits == expected
