import pytest
from hypothesis import given, settings, strategies as st

from dshrpl.dodag import (ParentCandidate, RankParams, attach, build_dodag, compute_rank,
                          select_parents)
from dshrpl.errors import ConfigurationError, DomainError, RankOverflowError
from dshrpl.state import NodeState
from dshrpl.types import EnergyLevel
from dshrpl.types import INFINITE_RANK

from fixtures import network


def test_select_parents_examples():
    p = RankParams()
    assert select_parents([ParentCandidate(3, 0.9, 200)], p).chosen == 3
    two = [ParentCandidate(5, 0.8, 3), ParentCandidate(6, 0.8, 2)]
    assert select_parents(two, p).chosen == 6
    low = select_parents([ParentCandidate(1, 0.2, 1), ParentCandidate(2, 0.49, 1)], p)
    assert not low.attached and low.parents == ()


def test_select_parents_tie_breaks_on_id():
    c = [ParentCandidate(9, 0.8, 3), ParentCandidate(4, 0.8, 3), ParentCandidate(7, 0.95, 9)]
    choice = select_parents(c, RankParams())
    assert choice.chosen == 7
    assert choice.parents == (7, 4, 9)


def test_compute_rank_examples():
    p = RankParams(min_h=128)
    assert compute_rank(128, 0.9, p) == 346
    assert compute_rank(500, 0, p) == 628
    with pytest.raises(RankOverflowError):
        compute_rank(65500, 0.5, p)
    with pytest.raises(DomainError):
        compute_rank(128, 1.5, p)


def test_rank_params_guard():
    with pytest.raises(ConfigurationError):
        RankParams(min_h=0)
    with pytest.raises(ConfigurationError):
        RankParams(min_h=300, max_h=200)
    assert RankParams().root_rank == 128
    assert RankParams(min_h=1, root_base=1).root_rank == 1


def test_single_node_network():
    states, nbrs = network([], 1)
    g = build_dodag(states, nbrs, RankParams())
    assert g.parent == {} and g.ranks == {0: 128}


def test_chain_ranks_increase():
    states, nbrs = network([(0, 1), (1, 2)], 3)
    g = build_dodag(states, nbrs, RankParams())
    assert g.parent == {1: 0, 2: 1}
    assert g.ranks == {0: 128, 1: 356, 2: 584}


def test_star_all_children_of_root_with_equal_ranks():
    states, nbrs = network([(0, i) for i in range(1, 5)], 5)
    g = build_dodag(states, nbrs, RankParams())
    assert all(g.parent[i] == 0 for i in range(1, 5))
    assert len({g.ranks[i] for i in range(1, 5)}) == 1


def test_unqualified_node_stays_unattached():
    states, nbrs = network([(0, 1), (1, 2)], 3, overrides={(2, 1): 0.3})
    g = build_dodag(states, nbrs, RankParams())
    assert 2 not in g.parent
    assert g.unattached() == [2]


def test_overflowing_candidate_is_skipped():
    st_ = NodeState(5, EnergyLevel.full(10))
    st_.opinions = {1: 0.9, 2: 0.6}
    st_.neighbor_ranks = {1: 65400, 2: 300}
    assert attach(st_, RankParams())
    assert st_.parent == 2 and st_.recorded_parent_rank == 300


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 14), st.data())
def test_built_graphs_are_sound(n, data):
    edges = set()
    for i in range(1, n):
        edges.add((data.draw(st.integers(0, i - 1)), i))        # spanning tree keeps it connected
    extra = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=n))
    edges |= {(a, b) for a, b in extra if a != b}
    rels = data.draw(st.lists(st.sampled_from([0.2, 0.5, 0.7, 0.9, 1.0]), min_size=n * n, max_size=n * n))
    overrides = {(i, j): rels[i * n + j] for i in range(n) for j in range(n)}
    states, nbrs = network(sorted(edges), n, overrides=overrides)
    params = RankParams()
    g = build_dodag(states, nbrs, params)
    assert g.violations(params.reliability_threshold,
                        lambda c, p: states[c].opinions.get(p)) == []
    assert all(states[i].rank != INFINITE_RANK for i in g.attached())
