import pytest

from coded_caching.problem import (
    DemandVector,
    DomainError,
    ProblemSize,
    all_demands,
    as_demand,
    distinct_demands,
)


@pytest.mark.parametrize("K,N", [(0, 1), (1, 0), (-2, 3), (1.5, 2), (True, 2)])
def test_problem_size_rejects_bad_values(K, N):
    with pytest.raises(DomainError):
        ProblemSize(K, N)


@pytest.mark.parametrize("K,N,nbar", [(1, 1, 1), (16, 64, 16), (10, 3, 3)])
def test_nbar(K, N, nbar):
    assert ProblemSize(K, N).nbar == nbar


def test_demand_vector_prefix_counts():
    d = DemandVector((1, 2, 1, 3))
    assert [d.distinct_count(ell) for ell in range(5)] == [0, 1, 2, 2, 3]
    assert str(d) == "1,2,1,3"
    with pytest.raises(DomainError):
        d.distinct_count(5)


def test_demand_validation():
    ps = ProblemSize(2, 2)
    as_demand((1, 2)).validate(ps)
    with pytest.raises(DomainError):
        as_demand((1, 3)).validate(ps)
    with pytest.raises(DomainError):
        as_demand((1,)).validate(ps)
    with pytest.raises(DomainError):
        DemandVector((0, 1))


def test_demand_enumerators():
    assert len(list(all_demands(3, 2))) == 9
    assert [d.entries for d in distinct_demands(3, 2)][:2] == [(1, 2), (1, 3)]
    assert len(list(distinct_demands(4, 3))) == 24
