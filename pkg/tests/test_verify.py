import pytest

from coded_caching import verify


def test_corpus_covers_all_small_instances():
    corpus = verify.corpus()
    assert len(corpus) == sum(K + 1 for K in (1, 2, 3)) * 3
    assert {(s.ps.K, s.ps.N) for s in corpus} == {(K, N) for K in (1, 2, 3) for N in (1, 2, 3)}


def test_expected_distinct_cases():
    cases = verify.expected_distinct_cases()
    assert all(N**ell <= 10**6 for N, ell in cases)
    assert (1000, 2) in cases and (1001, 2) not in cases
    assert (2, 19) in cases and (2, 20) not in cases
    assert (3, 3) in cases and (1, 64) in cases


def test_schemes_suite(seed):
    assert verify.run("schemes", seed) == []


def test_han_suite_small(seed):
    assert verify.han_instances(seed, count=50) == []


def test_unknown_suite():
    with pytest.raises(ValueError):
        verify.run("nope")


def test_failure_record():
    f = verify.Failure("lp", "sandwich", "M=0")
    assert f.to_dict() == {"suite": "lp", "check": "sandwich", "detail": "M=0"}
