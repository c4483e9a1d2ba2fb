"""Isolation of confirmed sinkholes and repair of the orphaned subgraph."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, Tuple

from .dodag import RankParams, form_waves
from .errors import QuarantineError
from .state import NodeState
from .types import BR_ID, INFINITE_RANK, DodagGraph, NodeId, Rank

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WarningMessage:
    malicious: NodeId
    malicious_rank: Rank
    issue_time: int

    @property
    def key(self) -> Tuple[int, NodeId]:
        """Duplicate-suppression key for the flooded warning."""
        return (self.issue_time, self.malicious)


@dataclass(frozen=True)
class QuarantineReport:
    malicious: NodeId
    orphans: Tuple[NodeId, ...]
    reattached: Tuple[NodeId, ...]
    unattached: Tuple[NodeId, ...]


def apply_warning(state: NodeState, warning: WarningMessage) -> bool:
    """Add the culprit to this node's quarantine list.

    Returns True when the node just lost its parent and must re-select.
    """
    bad = warning.malicious
    state.quarantine.add(bad)
    state.neighbor_ranks.pop(bad, None)
    if bad in state.parent_set:
        state.parent_set = tuple(p for p in state.parent_set if p != bad)
    if state.parent == bad:
        state.detach()
        return True
    return False


def quarantine_node(
    graph: DodagGraph,
    states: Mapping[NodeId, NodeState],
    neighbors: Mapping[NodeId, Iterable[NodeId]],
    malicious: NodeId,
    params: RankParams,
    issue_time: int = 0,
) -> Tuple[DodagGraph, QuarantineReport]:
    """Quarantine ``malicious`` everywhere and let its former subtree re-attach.

    Every descendant is detached (as if it had heard a poisoned DIO) and the
    surrounding attached nodes re-advertise, so the orphans re-run parent
    selection with the culprit excluded.
    """
    if malicious == graph.root or malicious == BR_ID:
        raise QuarantineError("the border router is trusted and cannot be quarantined")
    if malicious not in states:
        log.warning("quarantine of unknown node %s ignored", malicious)
        return graph.copy(), QuarantineReport(malicious, (), (), ())
    warning = WarningMessage(malicious, graph.ranks.get(malicious, INFINITE_RANK), issue_time)
    orphans = tuple(graph.descendants(malicious))
    for nid in sorted(states):
        if nid != malicious:
            apply_warning(states[nid], warning)
    states[malicious].detach()
    for o in orphans:
        states[o].detach()
    for o in orphans:
        for nb in neighbors.get(o, ()):
            if nb in states:
                states[nb].neighbor_ranks[o] = INFINITE_RANK
    orphan_set = set(orphans)
    emitters = sorted(
        nb for o in orphans for nb in neighbors.get(o, ())
        if nb in states and nb not in orphan_set and nb != malicious and states[nb].attached
    )
    form_waves(states, neighbors, params, emitters)
    reattached = tuple(o for o in orphans if states[o].attached)
    unattached = tuple(o for o in orphans if not states[o].attached)
    new_graph = DodagGraph.from_states(states, graph.root)
    return new_graph, QuarantineReport(malicious, orphans, reattached, unattached)
