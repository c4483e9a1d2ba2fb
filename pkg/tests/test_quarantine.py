import logging

import pytest

from dshrpl.dodag import RankParams, build_dodag
from dshrpl.errors import QuarantineError
from dshrpl.quarantine import WarningMessage, apply_warning, quarantine_node

from fixtures import SIX_NODE_EDGES, network

UNIT = RankParams(min_h=1, root_base=1, reliability_scale=0)


def six_node():
    states, nbrs = network(SIX_NODE_EDGES, 6)
    return build_dodag(states, nbrs, UNIT), states, nbrs


def no_route_through(graph, bad):
    return all(bad not in (graph.path_to_root(n) or []) for n in graph.nodes if n != bad)


def test_six_node_build_matches_hand_ranks():
    g, _, _ = six_node()
    assert g.ranks == {0: 1, 1: 2, 2: 2, 3: 2, 4: 3, 5: 3}
    assert g.parent == {1: 0, 2: 0, 3: 0, 4: 1, 5: 3}


def test_quarantining_a_leaf_removes_only_the_leaf():
    g, states, nbrs = six_node()
    g2, rep = quarantine_node(g, states, nbrs, 2, UNIT)
    assert rep.orphans == ()
    assert g2.parent == {k: v for k, v in g.parent.items() if k != 2}
    assert g2.quarantined == frozenset({2})
    assert 2 not in g2.ranks


def test_six_node_orphan_reattaches_around_the_culprit():
    g, states, nbrs = six_node()
    g2, rep = quarantine_node(g, states, nbrs, 3, UNIT, issue_time=7)
    assert rep.orphans == (5,) and rep.reattached == (5,) and rep.unattached == ()
    assert g2.parent[5] == 4 and g2.ranks[5] == 4
    assert no_route_through(g2, 3)
    assert g2.violations() == []
    assert all(3 in states[n].quarantine for n in states if n != 3)


def test_cut_vertex_leaves_descendants_unattached():
    states, nbrs = network([(0, 1), (1, 2), (2, 3)], 4)
    g = build_dodag(states, nbrs, UNIT)
    g2, rep = quarantine_node(g, states, nbrs, 1, UNIT)
    assert rep.orphans == (2, 3) and rep.unattached == (2, 3)
    assert g2.unattached() == [2, 3]
    assert g2.parent == {}


def test_border_router_cannot_be_quarantined():
    g, states, nbrs = six_node()
    with pytest.raises(QuarantineError):
        quarantine_node(g, states, nbrs, 0, UNIT)


def test_unknown_node_is_a_logged_noop(caplog):
    g, states, nbrs = six_node()
    with caplog.at_level(logging.WARNING):
        g2, rep = quarantine_node(g, states, nbrs, 42, UNIT)
    assert g2.parent == g.parent and rep.orphans == ()
    assert "42" in caplog.text


def test_apply_warning_drops_parent_and_candidate():
    _, states, _ = six_node()
    st_ = states[5]
    assert apply_warning(st_, WarningMessage(3, 2, 0))
    assert st_.parent is None and 3 not in st_.neighbor_ranks and 3 in st_.quarantine
    assert not apply_warning(states[4], WarningMessage(3, 2, 0))
    assert WarningMessage(3, 2, 9).key == (9, 3)
