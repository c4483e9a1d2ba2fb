"""Monitoring tables and the reliability calculus built on them.

Each node keeps one :class:`MonitoringEntry` per neighbour. Entries are fed by
REQP_R floods (trust counter, advertised energy) and by the monitoring tables
neighbours return inside their ACKs (veracity). Reliability is then mixed
over time per component, combined with configurable weights, and averaged
over the opinions received from common neighbours.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Iterable, List, Mapping, Optional, Sequence

from .errors import ConfigurationError, DomainError, FormatError, InsufficientEvidenceError
from .packets import Ack, AckCode, AckEntry, ReqpR, from_fixed, to_fixed
from .types import EnergyLevel, NodeId

if TYPE_CHECKING:
    from .state import NodeState

COMPONENTS = ("energy", "trust", "veracity")
DEFAULT_VERACITY = 0.5
TRUST_AGREEMENT = 1
ENERGY_AGREEMENT = 0.05


@dataclass
class MonitoringEntry:
    neighbor: NodeId
    observed_energy: EnergyLevel
    trust_count: int = 0
    veracity: float = DEFAULT_VERACITY
    last_component_reliability: Dict[str, float] = field(default_factory=dict)
    last_update: int = 0

    def bump_trust(self) -> None:
        self.trust_count += 1


@dataclass(frozen=True)
class ReliabilityWeights:
    w1: float = 0.3          # energy
    w2: float = 0.4          # trust
    w3: float = 0.3          # veracity
    alpha: float = 0.7
    delta_t: float = 10.0    # seconds between reliability updates
    trust_cap: int = 20

    def __post_init__(self):
        for name in ("w1", "w2", "w3", "alpha"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ConfigurationError(f"{name}={v} outside [0, 1]")
        if abs(self.w1 + self.w2 + self.w3 - 1) > 1e-9:
            raise ConfigurationError("reliability weights must sum to 1")
        if self.delta_t <= 0:
            raise ConfigurationError("delta_t must be positive")
        if self.trust_cap < 1:
            raise ConfigurationError("trust_cap must be at least 1")


@dataclass(frozen=True)
class ClaimedEntry:
    """One row of a peer's monitoring table as carried in its ACK."""

    neighbor: NodeId
    trust_count: int
    energy: int


def _unit(name, v):
    if not 0 <= v <= 1:
        raise DomainError(f"{name}={v} outside [0, 1]")
    return v


def component_reliability(direct, previous, alpha):
    """History-mixed reliability of one component: ``alpha*direct + (1-alpha)*previous``."""
    _unit("direct", direct)
    _unit("previous", previous)
    _unit("alpha", alpha)
    return alpha * direct + (1 - alpha) * previous


def weighted_reliability(energy, trust, veracity, w: ReliabilityWeights):
    if not isinstance(w, ReliabilityWeights):
        raise ConfigurationError("weights must be a ReliabilityWeights instance")
    _unit("energy", energy)
    _unit("trust", trust)
    _unit("veracity", veracity)
    r = w.w1 * energy + w.w2 * trust + w.w3 * veracity
    # float weights summing to 1 within 1e-9 can overshoot by an ulp
    return min(max(r, 0), 1)


def _mean(values, what):
    values = list(values)
    if not values:
        raise InsufficientEvidenceError(f"no {what} received")
    for v in values:
        _unit(what, v)
    return sum(values) / len(values)


def final_reliability(received_values: Sequence) -> float:
    """Mean reliability of a neighbour over the m nodes that reported on it."""
    return _mean(received_values, "reliability value")


def self_reliability(received_about_self: Sequence) -> float:
    """Mean of the reliabilities the n reporting neighbours hold about this node."""
    return _mean(received_about_self, "reliability about self")


def trust_component(trust_count: int, trust_cap: int) -> float:
    return min(trust_count / trust_cap, 1.0)


def veracity_score(own_table, peer_claims: Iterable[ClaimedEntry]) -> float:
    """Fraction of a peer's claims about shared neighbours that match local observations.

    A claim agrees when its trust counter is within one of ours and its energy
    within 5% of the energy we observed. Without any overlap the score is 0.5.
    """
    if isinstance(own_table, Mapping):
        local = dict(own_table)
    else:
        local = {e.neighbor: e for e in own_table}
    overlap = agree = 0
    for claim in peer_claims:
        mine = local.get(claim.neighbor)
        if mine is None:
            continue
        overlap += 1
        ref = mine.observed_energy.residual
        if (abs(claim.trust_count - mine.trust_count) <= TRUST_AGREEMENT
                and abs(claim.energy - ref) <= ENERGY_AGREEMENT * ref):
            agree += 1
    if overlap == 0:
        return DEFAULT_VERACITY
    return agree / overlap


# --- per-node handlers ----------------------------------------------------

@dataclass(frozen=True)
class Broadcast:
    packet: object


@dataclass(frozen=True)
class Unicast:
    dest: NodeId
    packet: object


def _route_malformed(route, sender) -> bool:
    return not route or route[-1] != sender or len(set(route)) != len(route)


def _entry(state: "NodeState", nid: NodeId, now: int) -> MonitoringEntry:
    e = state.table.get(nid)
    if e is None:
        e = MonitoringEntry(nid, EnergyLevel.full(state.energy.initial), last_update=now)
        state.table[nid] = e
    return e


def table_claims(state: "NodeState") -> tuple:
    return tuple(
        AckEntry(e.neighbor, e.trust_count, e.observed_energy.residual, to_fixed(e.veracity))
        for _, e in sorted(state.table.items())
    )


def handle_reqp_r(state: "NodeState", pkt: ReqpR, now: int = 0) -> List[object]:
    """Process one received REQP_R; mutates ``state`` and returns transmit actions.

    The transmitter is the last hop listed in the route (it also fills the
    node-id and energy fields). A given (transmitter, sequence) pair is counted
    once. A packet whose route already lists this node is discarded after the
    transmitter has been credited; so is any later copy of a flood this node
    has already relayed.
    """
    sender = pkt.node_id
    if _route_malformed(pkt.route, sender):
        raise FormatError(f"malformed REQP_R route {pkt.route!r}")
    if sender in state.quarantine:
        return []
    key = (sender, pkt.seq)
    if key in state.seen_reqp:
        return []
    state.seen_reqp.add(key)
    entry = _entry(state, sender, now)
    entry.bump_trust()
    entry.observed_energy = EnergyLevel(min(pkt.energy, state.energy.initial), state.energy.initial)
    entry.last_update = now
    if state.node_id in pkt.route or pkt.seq in state.relayed_seqs:
        return []
    state.relayed_seqs.add(pkt.seq)
    route = pkt.route + (state.node_id,)
    fwd = ReqpR(state.node_id, state.energy.residual, pkt.source, pkt.seq, route)
    ack = Ack(state.node_id, pkt.seq, route, table_claims(state), AckCode.REQP_R)
    return [Broadcast(fwd), Unicast(sender, ack)]


def handle_reqp_ack(state: "NodeState", ack: Ack, now: int = 0) -> List[object]:
    """Relay a REQP_R acknowledgement one hop back along its source route.

    The first hop (the node the REQP_R copy came from) scores the origin's
    veracity against its own table; the root records the route and the
    origin's neighbour list.
    """
    route = ack.route
    if state.node_id not in route or route[-1] != ack.origin:
        raise FormatError("ACK route does not traverse this node")
    idx = route.index(state.node_id)
    if idx == len(route) - 2:
        claims = [ClaimedEntry(e.neighbor, e.trust, e.energy) for e in ack.entries
                  if e.neighbor != state.node_id]
        entry = _entry(state, ack.origin, now)
        entry.veracity = veracity_score(state.table, claims)
        entry.last_update = now
    if idx == 0:
        state.known_routes[ack.origin] = route
        state.known_adjacency[ack.origin] = frozenset(e.neighbor for e in ack.entries)
        return []
    return [Unicast(route[idx - 1], ack)]


def update_reliabilities(state: "NodeState", w: ReliabilityWeights, now: int = 0) -> Dict[NodeId, float]:
    """Refresh every neighbour's component reliabilities and combined opinion.

    On the first update the history term equals the direct observation.
    Old component values are appended to the node's tamper-proof store
    before being overwritten.
    """
    for nid, e in sorted(state.table.items()):
        if nid in state.quarantine:
            continue
        direct = {
            "energy": e.observed_energy.fraction,
            "trust": trust_component(e.trust_count, w.trust_cap),
            "veracity": e.veracity,
        }
        if e.last_component_reliability:
            state.tpm.append(now, nid, dict(e.last_component_reliability))
        mixed = {
            x: component_reliability(direct[x], e.last_component_reliability.get(x, direct[x]), w.alpha)
            for x in COMPONENTS
        }
        e.last_component_reliability = mixed
        e.last_update = now
        state.opinions[nid] = weighted_reliability(mixed["energy"], mixed["trust"], mixed["veracity"], w)
    return dict(state.opinions)


def evidence_about(state: "NodeState", j: NodeId) -> List[float]:
    """Reliability values about neighbour ``j`` available to this node.

    Own opinion first, then those of common neighbours learnt from their DIOs.
    """
    values = []
    if j in state.opinions:
        values.append(state.opinions[j])
    for k in sorted(state.received_opinions):
        if k == j or k in state.quarantine:
            continue
        v = state.received_opinions[k].get(j)
        if v is not None:
            values.append(v)
    return values


def neighbor_final_reliability(state: "NodeState", j: NodeId) -> Optional[float]:
    values = evidence_about(state, j)
    return final_reliability(values) if values else None


def own_reliability(state: "NodeState") -> Optional[float]:
    values = [ops[state.node_id] for k, ops in sorted(state.received_opinions.items())
              if state.node_id in ops and k not in state.quarantine]
    return self_reliability(values) if values else None


def record_opinions(state: "NodeState", sender: NodeId, opinions) -> None:
    state.received_opinions[sender] = {node: from_fixed(v) for node, v in opinions}


def dump_table(state: "NodeState") -> str:
    """Line-oriented debug dump: ``neighbor trust energy veracity`` per entry."""
    return "".join(
        f"{e.neighbor} {e.trust_count} {e.observed_energy.residual} {e.veracity:.4f}\n"
        for _, e in sorted(state.table.items())
    )
