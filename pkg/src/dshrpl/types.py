"""Identifiers, ranks, energy levels and the global DODAG view."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional

from .errors import DomainError

NodeId = int
Rank = int

BR_ID: NodeId = 0
U16_MAX = 0xFFFF
U32_MAX = 0xFFFF_FFFF

#: Rank advertised by a node with no parent. Never a valid parent rank.
INFINITE_RANK: Rank = U16_MAX


def check_node_id(value: int) -> NodeId:
    if not 0 <= value <= U32_MAX:
        raise DomainError(f"node id {value} outside unsigned 32-bit range")
    return value


def check_rank(value: int) -> Rank:
    if not 0 <= value <= U16_MAX:
        raise DomainError(f"rank {value} outside unsigned 16-bit range")
    return value


@dataclass(frozen=True)
class EnergyLevel:
    """Residual and initial energy in integer milli-units."""

    residual: int
    initial: int

    def __post_init__(self):
        if self.initial <= 0:
            raise DomainError("initial energy must be positive")
        if not 0 <= self.residual <= self.initial:
            raise DomainError(f"residual {self.residual} outside [0, {self.initial}]")

    @classmethod
    def full(cls, initial: int) -> "EnergyLevel":
        return cls(initial, initial)

    def debit(self, amount: int) -> "EnergyLevel":
        if amount < 0:
            raise DomainError("energy debit must be non-negative")
        return EnergyLevel(max(0, self.residual - amount), self.initial)

    @property
    def fraction(self) -> float:
        return self.residual / self.initial


@dataclass
class DodagGraph:
    """Observer-side aggregate of every node's parent pointer and rank.

    ``parent`` maps an attached child to its selected parent; the root and
    unattached nodes are absent from it.
    """

    nodes: FrozenSet[NodeId]
    parent: Dict[NodeId, NodeId] = field(default_factory=dict)
    ranks: Dict[NodeId, Rank] = field(default_factory=dict)
    quarantined: FrozenSet[NodeId] = frozenset()
    root: NodeId = BR_ID

    def copy(self) -> "DodagGraph":
        return DodagGraph(self.nodes, dict(self.parent), dict(self.ranks), self.quarantined, self.root)

    def children(self, node: NodeId) -> List[NodeId]:
        return sorted(c for c, p in self.parent.items() if p == node)

    def descendants(self, node: NodeId) -> List[NodeId]:
        out, stack = [], [node]
        kids: Dict[NodeId, List[NodeId]] = {}
        for c, p in self.parent.items():
            kids.setdefault(p, []).append(c)
        while stack:
            for c in kids.get(stack.pop(), ()):
                out.append(c)
                stack.append(c)
        return sorted(out)

    def path_to_root(self, node: NodeId) -> Optional[List[NodeId]]:
        """Parent chain from ``node`` up to the root, or None if it does not reach it."""
        path = [node]
        seen = {node}
        while path[-1] != self.root:
            nxt = self.parent.get(path[-1])
            if nxt is None or nxt in seen:
                return None
            path.append(nxt)
            seen.add(nxt)
        return path

    def attached(self) -> List[NodeId]:
        return sorted(n for n in self.nodes if self.path_to_root(n) is not None)

    def unattached(self) -> List[NodeId]:
        return sorted(
            n for n in self.nodes if n not in self.quarantined and self.path_to_root(n) is None
        )

    def has_cycle(self) -> bool:
        for start in self.parent:
            seen = set()
            cur: Optional[NodeId] = start
            while cur is not None:
                if cur in seen:
                    return True
                seen.add(cur)
                cur = self.parent.get(cur)
        return False

    def violations(self, reliability_threshold=None, final_reliability=None) -> List[str]:
        """List every broken DODAG invariant; an empty list means the graph is sound.

        When ``final_reliability`` (child, parent) -> value is given together with a
        threshold, parent edges are also checked for threshold soundness.
        """
        problems = []
        if self.root in self.parent:
            problems.append("root has a parent")
        if self.has_cycle():
            problems.append("parent relation has a cycle")
        for child, par in sorted(self.parent.items()):
            if child in self.quarantined or par in self.quarantined:
                problems.append(f"edge {child}->{par} touches a quarantined node")
            rc, rp = self.ranks.get(child), self.ranks.get(par)
            if rc is None or rp is None:
                problems.append(f"edge {child}->{par} lacks a rank")
            elif rc <= rp and self.path_to_root(child) is not None:
                problems.append(f"rank not increasing on {child}({rc})->{par}({rp})")
            if final_reliability is not None and reliability_threshold is not None:
                r = final_reliability(child, par)
                if r is None or r < reliability_threshold:
                    problems.append(f"edge {child}->{par} below reliability threshold")
        return problems

    def edge_lines(self) -> List[str]:
        """One ``child parent rank`` line per node; ``-`` marks a missing parent."""
        lines = []
        for n in sorted(self.nodes):
            par = self.parent.get(n)
            rank = self.ranks.get(n)
            lines.append(f"{n} {'-' if par is None else par} {'-' if rank is None else rank}")
        return lines

    def write_edge_list(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(self.edge_lines()) + "\n")

    @classmethod
    def from_states(cls, states: Mapping[NodeId, object], root: NodeId = BR_ID) -> "DodagGraph":
        """Aggregate parent pointers and ranks out of per-node states.

        The root's quarantine list is authoritative for the quarantined set.
        """
        root_state = states.get(root)
        quarantined = frozenset(root_state.quarantine) if root_state is not None else frozenset()
        parent, ranks = {}, {}
        for nid, st in states.items():
            if nid in quarantined:
                continue
            if st.rank != INFINITE_RANK:
                ranks[nid] = st.rank
            if st.parent is not None and nid != root:
                parent[nid] = st.parent
        return cls(frozenset(states), parent, ranks, quarantined, root)
