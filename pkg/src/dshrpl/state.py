"""Per-node mutable state owned by each node's state machine."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from .trust import MonitoringEntry
from .types import BR_ID, INFINITE_RANK, EnergyLevel, NodeId, Rank


class TpmStore:
    """Append-only record of a node's past observations.

    Stands in for the tamper-proof module: entries can be added and read, never
    rewritten.
    """

    def __init__(self):
        self._records: List[Tuple[int, NodeId, dict]] = []

    def append(self, time: int, neighbor: NodeId, values: dict) -> None:
        self._records.append((time, neighbor, dict(values)))

    @property
    def records(self) -> Tuple[Tuple[int, NodeId, dict], ...]:
        return tuple(self._records)

    def history(self, neighbor: NodeId) -> List[dict]:
        return [dict(v) for _, n, v in self._records if n == neighbor]

    def __len__(self):
        return len(self._records)


@dataclass
class NodeState:
    node_id: NodeId
    energy: EnergyLevel
    rank: Rank = INFINITE_RANK
    parent: Optional[NodeId] = None
    parent_set: Tuple[NodeId, ...] = ()
    # parent rank as recorded when the routing entry was built or last updated
    recorded_parent_rank: Optional[Rank] = None
    parent_reliability: Optional[float] = None
    table: Dict[NodeId, MonitoringEntry] = field(default_factory=dict)
    quarantine: Set[NodeId] = field(default_factory=set)
    seen_reqp: Set[Tuple[NodeId, int]] = field(default_factory=set)
    relayed_seqs: Set[int] = field(default_factory=set)
    opinions: Dict[NodeId, float] = field(default_factory=dict)
    received_opinions: Dict[NodeId, Dict[NodeId, float]] = field(default_factory=dict)
    neighbor_ranks: Dict[NodeId, Rank] = field(default_factory=dict)
    self_reliability: Optional[float] = None
    known_routes: Dict[NodeId, Tuple[NodeId, ...]] = field(default_factory=dict)
    known_adjacency: Dict[NodeId, FrozenSet[NodeId]] = field(default_factory=dict)
    tpm: TpmStore = field(default_factory=TpmStore)

    @property
    def is_root(self) -> bool:
        return self.node_id == BR_ID

    @property
    def attached(self) -> bool:
        return self.is_root or (self.parent is not None and self.rank != INFINITE_RANK)

    def detach(self) -> None:
        self.parent = None
        self.parent_set = ()
        self.recorded_parent_rank = None
        self.parent_reliability = None
        if not self.is_root:
            self.rank = INFINITE_RANK
