"""Reliability-driven parent selection, rank assignment and DODAG formation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import ConfigurationError, DomainError, RankOverflowError
from .state import NodeState
from .trust import neighbor_final_reliability, own_reliability
from .types import BR_ID, INFINITE_RANK, DodagGraph, NodeId, Rank


@dataclass(frozen=True)
class ParentCandidate:
    neighbor: NodeId
    final_reliability: float
    advertised_rank: Rank


@dataclass(frozen=True)
class RankParams:
    min_h: int = 128
    max_h: int = 1024
    root_base: Optional[int] = None        # None means min_h
    reliability_threshold: float = 0.5
    # multiplier applied to the parent's reliability in the rank increment;
    # 0 gives plain hop-count ranks
    reliability_scale: int = 100

    def __post_init__(self):
        if not 0 < self.min_h <= self.max_h:
            raise ConfigurationError("need 0 < min_h <= max_h")
        if not 0 <= self.reliability_threshold <= 1:
            raise ConfigurationError("reliability_threshold outside [0, 1]")
        if self.reliability_scale < 0:
            raise ConfigurationError("reliability_scale must be non-negative")
        if self.root_base is not None and not 0 < self.root_base < INFINITE_RANK:
            raise ConfigurationError("root_base outside the rank range")

    @property
    def root_rank(self) -> Rank:
        return self.min_h if self.root_base is None else self.root_base


@dataclass(frozen=True)
class ParentChoice:
    parents: Tuple[NodeId, ...]            # qualifying set, best first
    chosen: Optional[NodeId]               # None: stay unattached

    @property
    def attached(self) -> bool:
        return self.chosen is not None


def _preference(c: ParentCandidate):
    return (-c.final_reliability, c.advertised_rank, c.neighbor)


def select_parents(candidates: Iterable[ParentCandidate], params: RankParams) -> ParentChoice:
    """Keep candidates at or above the reliability threshold and pick the best.

    Best means highest final reliability, then lowest advertised rank, then
    lowest node id. An empty qualifying set leaves the node unattached.
    """
    qualifying = sorted(
        (c for c in candidates
         if c.advertised_rank != INFINITE_RANK and c.final_reliability >= params.reliability_threshold),
        key=_preference,
    )
    if not qualifying:
        return ParentChoice((), None)
    return ParentChoice(tuple(c.neighbor for c in qualifying), qualifying[0].neighbor)


def compute_rank(parent_rank: Rank, parent_final_reliability, params: RankParams) -> Rank:
    """Parent rank plus the rounded reliability term plus MIN-H.

    The reliability term is ``reliability * reliability_scale`` rounded half up.
    """
    if not 0 <= parent_final_reliability <= 1:
        raise DomainError(f"reliability {parent_final_reliability} outside [0, 1]")
    # floor(x + 1/2) written so that Fraction inputs stay exact
    term = int((2 * parent_final_reliability * params.reliability_scale + 1) // 2)
    rank = parent_rank + term + params.min_h
    if rank >= INFINITE_RANK:
        raise RankOverflowError(f"rank {rank} does not fit in 16 bits")
    return rank


def candidates_for(state: NodeState, exclude: Sequence[NodeId] = ()) -> List[ParentCandidate]:
    """Parent candidates visible to ``state``: neighbours with a finite advertised rank."""
    out = []
    for nid, rank in sorted(state.neighbor_ranks.items()):
        if rank == INFINITE_RANK or nid in state.quarantine or nid in exclude:
            continue
        rel = neighbor_final_reliability(state, nid)
        if rel is not None:
            out.append(ParentCandidate(nid, rel, rank))
    return out


def attach(state: NodeState, params: RankParams, exclude: Sequence[NodeId] = ()) -> bool:
    """Run parent selection and rank computation for one node.

    Candidates are tried in preference order; one whose rank would overflow
    is skipped. Returns whether the node ended up attached.
    """
    cands = candidates_for(state, exclude)
    choice = select_parents(cands, params)
    by_id = {c.neighbor: c for c in cands}
    for nid in choice.parents:
        c = by_id[nid]
        try:
            rank = compute_rank(c.advertised_rank, c.final_reliability, params)
        except RankOverflowError:
            continue
        state.parent = nid
        state.parent_set = choice.parents
        state.rank = rank
        state.recorded_parent_rank = c.advertised_rank
        state.parent_reliability = c.final_reliability
        return True
    state.detach()
    return False


def refresh_rank(state: NodeState, parent_rank: Rank, params: RankParams) -> bool:
    """Recompute the node's rank after its parent advertised ``parent_rank``.

    Returns whether the rank changed. The recorded parent rank is updated too.
    """
    rel = neighbor_final_reliability(state, state.parent)
    if rel is None:
        rel = state.parent_reliability or 0.0
    try:
        rank = compute_rank(parent_rank, rel, params)
    except RankOverflowError:
        state.detach()
        return True
    changed = rank != state.rank
    state.rank = rank
    state.recorded_parent_rank = parent_rank
    state.parent_reliability = rel
    return changed


def form_waves(
    states: Mapping[NodeId, NodeState],
    neighbors: Mapping[NodeId, Iterable[NodeId]],
    params: RankParams,
    emitters: Iterable[NodeId],
) -> List[NodeId]:
    """Propagate DIOs wave by wave from ``emitters`` until nothing changes.

    In each wave the DIOs of the nodes attached in the previous wave are
    delivered, then every unattached node that heard one selects a parent.
    Only already attached nodes are ever candidates, so the result is
    acyclic. Returns the nodes attached, in attachment order.
    """
    attached_order = []
    wave = sorted(set(emitters))
    while wave:
        heard = set()
        for sender in wave:
            st = states[sender]
            for nb in sorted(neighbors.get(sender, ())):
                rx = states.get(nb)
                if rx is None or sender in rx.quarantine:
                    continue
                rx.neighbor_ranks[sender] = st.rank
                if not rx.attached:
                    heard.add(nb)
        nxt = []
        for nid in sorted(heard):
            st = states[nid]
            if st.is_root or st.attached:
                continue
            if attach(st, params):
                attached_order.append(nid)
                nxt.append(nid)
        for nid in nxt:
            states[nid].self_reliability = own_reliability(states[nid])
        wave = nxt
    return attached_order


def build_dodag(
    states: Mapping[NodeId, NodeState],
    neighbors: Mapping[NodeId, Iterable[NodeId]],
    params: RankParams,
    root: NodeId = BR_ID,
) -> DodagGraph:
    """Form the DODAG over nodes whose monitoring tables are already populated.

    The root takes the base rank and no parent; DIOs then flow outward until
    quiescence. Nodes without a qualifying candidate stay unattached.
    """
    if root not in states:
        raise ConfigurationError("the border router must be part of the network")
    br = states[root]
    br.parent = None
    br.rank = params.root_rank
    for nid, st in states.items():
        st.neighbor_ranks.clear()
        if nid != root:
            st.detach()
    form_waves(states, neighbors, params, [root])
    return DodagGraph.from_states(states, root)
