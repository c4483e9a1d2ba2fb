"""Single-threaded discrete-event simulation of a DODAG under sinkhole attack.

Every packet is encoded to bytes on transmission and decoded on reception,
so the wire format is exercised on each hop. Time is kept in integer
microseconds; ties are broken by scheduling order, which is itself a pure
function of the configuration, so a run is fully reproducible.

Run phases, all driven from the event queue:

1. warm-up: the root floods REQP_R every ``delta_t`` seconds; nodes fill
   their monitoring tables and refresh reliabilities between rounds
2. every node broadcasts its opinions once; the root measures clean-route
   PDR samples to set the detection threshold
3. the root starts advertising; nodes collect DIOs for ``attach_window``
   seconds, pick a parent and advertise in turn
4. encrypted data traffic starts, attackers activate, and (when the
   defense is on) rank-rule reports lead to PDR probing and quarantine
"""

from __future__ import annotations

import heapq
import itertools
import logging
import random
from functools import lru_cache
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from ..detection import (DioVerdict, PdrProbeRecord, PdrThresholdState, ProbeVerdict,
                         RankObservation, classify_dio, confirm_sinkhole, update_threshold)
from ..dodag import attach, refresh_rank
from ..errors import DecodeError, FormatError, IndeterminateError, ProbeError, RoutingError
from ..he import Ciphertext, decrypt, encrypt, eval_add, keygen
from ..packets import (Ack, AckCode, Data, Dio, PacketType, ProbeOptions, ReqpR, RplMc,
                       WarningCode, WarningPacket, address_node, decode_packet,
                       decode_probe_options, encode_packet, encode_probe_options,
                       node_address, to_fixed)
from ..quarantine import WarningMessage, apply_warning
from ..state import NodeState
from ..trust import (Broadcast, Unicast, handle_reqp_ack, handle_reqp_r, own_reliability,
                     record_opinions, update_reliabilities)
from ..types import BR_ID, INFINITE_RANK, DodagGraph, EnergyLevel, NodeId
from .attacker import AttackerProfile, DioEmission, Drop, Emit, Transit, step_attacker
from .config import SECOND, ScenarioConfig, derive_seed, ticks
from .topology import Topology, generate_topology
from .trace import EventTrace

log = logging.getLogger(__name__)

KIND_NAMES = {k: k.name for k in PacketType}
# decoding is pure and packets are immutable, so the copies of one broadcast
# can share a single decode
_decode = lru_cache(maxsize=512)(decode_packet)
DRAIN = 2.0          # seconds at the end of the run without new data
SETTLE = 15.0        # seconds between DODAG build start and data start
ATTACK_LEAD = 5.0    # seconds between data start and default attack start


@dataclass
class LinkTally:
    sent: int = 0
    delivered: int = 0
    lost: int = 0

    @property
    def in_flight(self) -> int:
        return self.sent - self.delivered - self.lost


@dataclass
class ProbeStage:
    name: str
    route: Tuple[NodeId, ...]
    serials: set = field(default_factory=set)
    sent: int = 0
    acks: int = 0

    def record(self) -> PdrProbeRecord:
        return PdrProbeRecord(self.route, self.sent, self.acks)


@dataclass
class ProbeSession:
    sid: int
    suspect: Optional[NodeId]        # None for clean-route threshold samples
    route: Tuple[NodeId, ...]        # root ... suspect [, node beyond the suspect]
    suspect_rank: int = INFINITE_RANK
    stage: Optional[ProbeStage] = None
    done: Optional[Callable] = None
    verdict: Optional[str] = None
    records: List[Tuple[str, PdrProbeRecord]] = field(default_factory=list)


@dataclass(frozen=True)
class QuarantineEvent:
    time: int
    malicious: NodeId
    orphans: Tuple[NodeId, ...]
    reattached: Tuple[NodeId, ...]
    unattached: Tuple[NodeId, ...]


class Simulation:
    def __init__(self, config: ScenarioConfig, topology: Optional[Topology] = None):
        cfg = config.validate()
        self.cfg = cfg
        self.topology = topology or generate_topology(cfg)
        self.neighbors = self.topology.neighbors
        self.node_ids = self.topology.nodes
        self.params = cfg.rank_params
        self.weights = cfg.weights
        self.trace = EventTrace(cfg.keep_records)
        self.now = 0
        self._queue: list = []
        self._order = itertools.count()
        self.states: Dict[NodeId, NodeState] = {
            n: NodeState(n, EnergyLevel.full(cfg.initial_energy)) for n in self.node_ids
        }
        self.energy_log: Dict[NodeId, List[int]] = {}
        self._link_rng = random.Random(derive_seed(cfg.seed, "links"))
        self._drop_rng = random.Random(derive_seed(cfg.seed, "drops"))
        self._data_rng = random.Random(derive_seed(cfg.seed, "data"))
        self._timer_rng = random.Random(derive_seed(cfg.seed, "timers"))
        self._probe_rng = random.Random(derive_seed(cfg.seed, "probes"))
        self.pk, self.sk = keygen(cfg.he_prime_bits, derive_seed(cfg.seed, "he"))
        self._nonce_rng = {n: random.Random(derive_seed(cfg.seed, "nonce", n)) for n in self.node_ids}

        self.attacker_order = self._draw_attackers()
        self.attackers: Dict[NodeId, AttackerProfile] = {}
        self.honest_sources = tuple(n for n in self.node_ids
                                    if n != BR_ID and n not in self.attacker_order)

        self.links: Dict[str, LinkTally] = {name: LinkTally() for name in KIND_NAMES.values()}
        self.data_sent: Counter = Counter()
        self.data_delivered: Counter = Counter()
        self.data_dropped: Counter = Counter()
        self._truth: Dict[Tuple[NodeId, int], int] = {}
        self._bundles: Dict[int, Tuple[Tuple[NodeId, int], ...]] = {}
        self._bundle_ids = itertools.count(1)
        self._node_seq: Counter = Counter()
        self._agg_buffer: Dict[NodeId, List[Tuple[Data, Ciphertext]]] = {}

        self._attach_pending: set = set()
        self._dio_timer: set = set()
        self._report_sent: Dict[Tuple[NodeId, NodeId], int] = {}
        self._warnings_seen: Dict[NodeId, set] = {n: set() for n in self.node_ids}

        # root-side detection bookkeeping
        self.threshold = PdrThresholdState()
        self.sessions: Dict[int, ProbeSession] = {}
        self._session_ids = itertools.count(1)
        self._serials = itertools.count(1)
        self._serial_stage: Dict[int, ProbeSession] = {}
        self.suspects: Dict[NodeId, str] = {}         # node -> probing|deferred|cleared|quarantined
        self._cleared_at: Dict[NodeId, int] = {}
        self.probed: set = set()
        self.detections: List[Tuple[int, NodeId, NodeId, str, str]] = []
        self.quarantines: List[QuarantineEvent] = []
        self._known_graph: Optional[Dict[NodeId, set]] = None

        self.t_build: Optional[int] = None
        self.t_data: Optional[int] = None
        self.t_data_stop = max(0, ticks(cfg.duration - DRAIN))
        self.t_attack: Optional[int] = None
        self.t_end = ticks(cfg.duration)

    # --- scheduling ---------------------------------------------------------

    def at(self, time: int, fn: Callable, *args) -> None:
        if time < self.now:
            raise RoutingError(f"event scheduled in the past ({time} < {self.now})")
        heapq.heappush(self._queue, (time, next(self._order), fn, args))

    def after(self, delay_s: float, fn: Callable, *args) -> None:
        self.at(self.now + ticks(delay_s), fn, *args)

    def run_until(self, t_end: int) -> None:
        q = self._queue
        while q and q[0][0] <= t_end:
            time, _, fn, args = heapq.heappop(q)
            self.now = time
            fn(*args)
        self.now = max(self.now, t_end)

    def log(self, kind: str, actor: int, detail: str = "") -> None:
        self.trace.log(self.now, kind, actor, detail)

    # --- set-up ---------------------------------------------------------------

    def _draw_attackers(self) -> Tuple[NodeId, ...]:
        cfg = self.cfg
        if cfg.attackers is not None:
            return tuple(cfg.attackers)
        pool = [n for n in self.node_ids if n != BR_ID]
        k = min(cfg.num_attackers, len(pool))
        rng = random.Random(derive_seed(cfg.seed, "attackers"))
        chosen = rng.sample(pool, k)
        return tuple(chosen)   # draw order doubles as activation order

    def start(self) -> None:
        """Queue the warm-up phase; later phases are chained from it."""
        cfg = self.cfg
        dt = cfg.delta_t
        for k in range(cfg.warmup_rounds):
            self.at(ticks(k * dt), self._reqp_round, k + 1)
            self.at(ticks(k * dt + dt / 2), self._reliability_update)
        t_w = ticks(cfg.warmup_rounds * dt)
        self.at(t_w, self._exchange_opinions)
        self.at(t_w + SECOND, self._start_threshold_sampling)
        self.at(self.t_end, self.log, "end", BR_ID, "")

    def run(self) -> "Simulation":
        self.start()
        self.run_until(self.t_end)
        return self

    # --- link layer -------------------------------------------------------------

    def _debit(self, node: NodeId, base: int, size: int) -> None:
        st = self.states[node]
        st.energy = st.energy.debit(base + self.cfg.byte_cost * size)

    def _size(self, packet, raw: bytes) -> int:
        return self.cfg.transaction_size if isinstance(packet, Data) else len(raw)

    def _hop_delay(self) -> int:
        jitter = self._link_rng.random() * self.cfg.hop_jitter
        return max(1, ticks(self.cfg.hop_latency + jitter))

    def _launch(self, src: NodeId, dest: NodeId, packet, raw: bytes) -> None:
        tally = self.links[KIND_NAMES[packet.kind]]
        tally.sent += 1
        if self.cfg.ambient_loss and self._link_rng.random() < self.cfg.ambient_loss:
            tally.lost += 1
            self.log("lost", src, f"{KIND_NAMES[packet.kind]} to={dest}")
            if isinstance(packet, Data):
                self._data_lost(packet)
            return
        self.at(self.now + self._hop_delay(), self._receive, dest, src, raw)

    def unicast(self, src: NodeId, dest: NodeId, packet) -> None:
        if dest not in self.neighbors[src]:
            raise RoutingError(f"{src} has no link to {dest}")
        raw = encode_packet(packet)
        self._debit(src, self.cfg.tx_cost, self._size(packet, raw))
        self.log("tx", src, f"{KIND_NAMES[packet.kind]} to={dest}")
        self._launch(src, dest, packet, raw)

    def broadcast(self, src: NodeId, packet) -> None:
        raw = encode_packet(packet)
        self._debit(src, self.cfg.tx_cost, self._size(packet, raw))
        self.log("tx", src, f"{KIND_NAMES[packet.kind]} to=*")
        for nb in self.neighbors[src]:
            self._launch(src, nb, packet, raw)

    def _do(self, node: NodeId, actions) -> None:
        for a in actions:
            if isinstance(a, Broadcast):
                self.broadcast(node, a.packet)
            elif isinstance(a, Unicast):
                self.unicast(node, a.dest, a.packet)

    def _receive(self, node: NodeId, src: NodeId, raw: bytes) -> None:
        try:
            pkt = _decode(raw)
        except DecodeError as exc:
            try:
                self.links[PacketType(raw[0]).name].delivered += 1
            except (ValueError, IndexError):
                pass
            self.log("corrupt", node, f"from={src} {exc}")
            return
        name = KIND_NAMES[pkt.kind]
        self.links[name].delivered += 1
        self._debit(node, self.cfg.rx_cost, self._size(pkt, raw))
        st = self.states[node]
        if src in st.quarantine and node != src:
            self.log("ignored", node, f"{name} from={src}")
            if isinstance(pkt, Data):
                self._data_drop(pkt, node, "quarantined-sender")
            return
        self.log("rx", node, f"{name} from={src}")
        handler = getattr(self, "_on_" + name.lower())
        handler(node, src, pkt)

    def active_attacker(self, node: NodeId) -> Optional[AttackerProfile]:
        prof = self.attackers.get(node)
        if prof is not None and prof.active(self.now):
            return prof
        return None

    # --- warm-up: REQP_R flooding and reliability --------------------------------

    def _reqp_round(self, k: int) -> None:
        root = self.states[BR_ID]
        self.log("phase", BR_ID, f"reqp_round={k}")
        self.broadcast(BR_ID, ReqpR(BR_ID, root.energy.residual, node_address(BR_ID), k, (BR_ID,)))

    def _on_reqp_r(self, node: NodeId, src: NodeId, pkt: ReqpR) -> None:
        try:
            actions = handle_reqp_r(self.states[node], pkt, self.now)
        except FormatError as exc:
            self.log("malformed", node, str(exc))
            return
        self._do(node, actions)

    def _reliability_update(self) -> None:
        for n in self.node_ids:
            update_reliabilities(self.states[n], self.weights, self.now)

    def _exchange_opinions(self) -> None:
        self.log("phase", BR_ID, "opinion_exchange")
        for n in self.node_ids:
            self.at(self.now + ticks(self._timer_rng.random() * 0.5), self._send_dio, n)

    # --- DIO handling and DODAG maintenance -----------------------------------------

    def _honest_dio(self, node: NodeId) -> Dio:
        st = self.states[node]
        if st.is_root:
            rel = 1.0
        else:
            rel = st.self_reliability
            if rel is None:
                rel = own_reliability(st) or 0.0
        opinions = tuple((j, to_fixed(v)) for j, v in sorted(st.opinions.items())
                         if j not in st.quarantine)
        return Dio(node, st.rank, to_fixed(rel), opinions)

    def _send_dio(self, node: NodeId) -> None:
        dio = self._honest_dio(node)
        prof = self.attackers.get(node)
        if prof is not None:
            for act in step_attacker(prof, DioEmission(self.now, dio), self._drop_rng):
                if isinstance(act, Emit):
                    dio = act.dio
        self.broadcast(node, dio)

    def _dio_tick(self, node: NodeId) -> None:
        if self.states[node].attached:
            self._send_dio(node)
        self.after(self.cfg.dio_period, self._dio_tick, node)

    def _ensure_dio_timer(self, node: NodeId) -> None:
        if node in self._dio_timer:
            return
        self._dio_timer.add(node)
        self.after(self._timer_rng.random() * self.cfg.dio_period, self._dio_tick, node)

    def _start_build(self) -> None:
        self.t_build = self.now
        root = self.states[BR_ID]
        root.rank = self.params.root_rank
        self.log("phase", BR_ID, f"build rank={root.rank}")
        self._send_dio(BR_ID)
        self._ensure_dio_timer(BR_ID)
        self.t_data = self.now + ticks(SETTLE)
        cfg = self.cfg
        if cfg.attack_start is not None:
            self.t_attack = max(self.now, ticks(cfg.attack_start))
        else:
            self.t_attack = self.t_data + ticks(ATTACK_LEAD)
        self._schedule_attackers()
        self._schedule_data()

    def _on_dio(self, node: NodeId, src: NodeId, pkt: Dio) -> None:
        st = self.states[node]
        record_opinions(st, src, pkt.opinions)
        if st.is_root:
            st.neighbor_ranks[src] = pkt.rank
            return
        suspicious = False
        if (self.cfg.defense and st.attached and pkt.rank != INFINITE_RANK
                and node not in self.attackers):
            obs = RankObservation(st.rank, st.recorded_parent_rank, pkt.rank, src)
            if classify_dio(obs) is DioVerdict.SUSPICIOUS:
                suspicious = True
                self._suspicious_dio(node, src, pkt.rank)
        if src == st.parent:
            if pkt.rank == INFINITE_RANK:
                st.neighbor_ranks[src] = INFINITE_RANK
                self._lose_parent(node, f"parent {src} poisoned")
                return
            if suspicious and pkt.rank < st.recorded_parent_rank:
                return
            st.neighbor_ranks[src] = pkt.rank
            if pkt.rank != st.recorded_parent_rank:
                old = st.rank
                refresh_rank(st, pkt.rank, self.params)
                if not st.attached:
                    self._lose_parent(node, "rank overflow")
                elif st.rank != old:
                    self.log("rank", node, f"{old}->{st.rank}")
                    self._send_dio(node)
            return
        if suspicious:
            return
        st.neighbor_ranks[src] = pkt.rank
        if not st.attached and pkt.rank != INFINITE_RANK:
            self._arm_attach(node)

    def _arm_attach(self, node: NodeId) -> None:
        if node in self._attach_pending:
            return
        self._attach_pending.add(node)
        self.after(self.cfg.attach_window, self._try_attach, node)

    def _try_attach(self, node: NodeId) -> None:
        self._attach_pending.discard(node)
        st = self.states[node]
        if st.attached:
            return
        if attach(st, self.params):
            st.self_reliability = own_reliability(st)
            self.log("attach", node, f"parent={st.parent} rank={st.rank}")
            self._send_dio(node)
            self._ensure_dio_timer(node)
        else:
            self.log("attach_failed", node, "")

    def _lose_parent(self, node: NodeId, reason: str) -> None:
        st = self.states[node]
        st.detach()
        self.log("detach", node, reason)
        self.broadcast(node, Dio(node, INFINITE_RANK, to_fixed(st.self_reliability or 0.0), ()))
        self._arm_attach(node)

    # --- attackers ---------------------------------------------------------------

    def _schedule_attackers(self) -> None:
        cfg = self.cfg
        for i, node in enumerate(self.attacker_order):
            offset = i * cfg.attack_interval if cfg.stagger else 0.0
            t = self.t_attack + ticks(offset)
            self.attackers[node] = AttackerProfile(node, 0, cfg.drop_probability, t)
            if t <= self.t_end:
                self.at(t, self._activate, node)

    def _activate(self, node: NodeId) -> None:
        self.log("activate", node, "")
        if node in self.states[BR_ID].quarantine:
            return
        self._send_dio(node)

    def _attacker_drops(self, node: NodeId, packet) -> bool:
        prof = self.active_attacker(node)
        if prof is None:
            return False
        acts = step_attacker(prof, Transit(self.now, packet), self._drop_rng)
        dropped = any(isinstance(a, Drop) for a in acts)
        self.log("attack", node, f"{KIND_NAMES[packet.kind]} {'drop' if dropped else 'pass'}")
        return dropped

    # --- encrypted data traffic ------------------------------------------------------

    def _schedule_data(self) -> None:
        if self.cfg.data_rate <= 0:
            return
        period = 1.0 / self.cfg.data_rate
        for n in self.honest_sources:
            phase = self._data_rng.random() * period
            t = self.t_data + ticks(phase)
            if t < self.t_data_stop:
                self.at(t, self._generate, n)

    def _generate(self, node: NodeId) -> None:
        if self.now >= self.t_data_stop:
            return
        self.after(1.0 / self.cfg.data_rate, self._generate, node)
        self._node_seq[node] += 1
        oseq = self._node_seq[node]
        value = self._data_rng.getrandbits(32)   # a 32-bit sensor reading
        self._truth[(node, oseq)] = value
        self.data_sent[node] += 1
        ct = encrypt(self.pk, value, self._nonce_rng[node])
        bid = next(self._bundle_ids)
        self._bundles[bid] = ((node, oseq),)
        pkt = Data(bid, ct.key_id, (node,), ct.to_bytes(self.pk))
        self.log("data_gen", node, f"bundle={bid}")
        self._forward_data(node, pkt)

    def _forward_data(self, node: NodeId, pkt: Data) -> None:
        st = self.states[node]
        if not st.attached or st.parent is None:
            self._data_drop(pkt, node, "no-route")
            return
        self.unicast(node, st.parent, pkt)

    def _data_drop(self, pkt: Data, node: NodeId, why: str) -> None:
        for origin, _ in self._bundles.pop(pkt.seq, ()):
            self.data_dropped[origin] += 1
        self.log("data_drop", node, f"bundle={pkt.seq} {why}")

    def _data_lost(self, pkt: Data) -> None:
        for origin, _ in self._bundles.pop(pkt.seq, ()):
            self.data_dropped[origin] += 1

    def _loop_detected(self, node: NodeId, src: NodeId) -> bool:
        """Upward traffic arriving from our own parent means the parent chain loops."""
        st = self.states[node]
        if node == BR_ID or src != st.parent:
            return False
        self.log("loop", node, f"upward packet from parent {src}")
        self._lose_parent(node, "routing loop")
        return True

    def _on_data(self, node: NodeId, src: NodeId, pkt: Data) -> None:
        if node == BR_ID:
            self._deliver_data(pkt)
            return
        if self._loop_detected(node, src):
            self._data_drop(pkt, node, "loop")
            return
        if self._attacker_drops(node, pkt):
            self._data_drop(pkt, node, "attacker")
            return
        if self.cfg.aggregation_window > 0:
            buf = self._agg_buffer.setdefault(node, [])
            if not buf:
                self.after(self.cfg.aggregation_window, self._flush_aggregate, node)
            buf.append((pkt, Ciphertext.from_bytes(pkt.ciphertext, pkt.key_id)))
            return
        self._forward_data(node, pkt)

    def _flush_aggregate(self, node: NodeId) -> None:
        buf = self._agg_buffer.pop(node, [])
        if not buf:
            return
        ct = buf[0][1]
        members = list(self._bundles.pop(buf[0][0].seq, ()))
        for pkt, c in buf[1:]:
            ct = eval_add(self.pk, ct, c)
            members.extend(self._bundles.pop(pkt.seq, ()))
        bid = next(self._bundle_ids)
        self._bundles[bid] = tuple(members)
        origins = tuple(sorted({o for o, _ in members}))
        pkt = Data(bid, ct.key_id, origins, ct.to_bytes(self.pk))
        self.log("aggregate", node, f"bundle={bid} parts={len(buf)}")
        self._forward_data(node, pkt)

    def _deliver_data(self, pkt: Data) -> None:
        members = self._bundles.pop(pkt.seq, ())
        value = decrypt(self.sk, Ciphertext.from_bytes(pkt.ciphertext, pkt.key_id))
        expected = sum(self._truth[m] for m in members) % self.pk.n
        ok = value == expected
        for origin, _ in members:
            if ok:
                self.data_delivered[origin] += 1
            else:
                self.data_dropped[origin] += 1
        self.log("data_rx", BR_ID, f"bundle={pkt.seq} parts={len(members)} {'ok' if ok else 'mismatch'}")

    # --- rank-rule reports ---------------------------------------------------------

    def _suspicious_dio(self, node: NodeId, suspect: NodeId, rank: int) -> None:
        st = self.states[node]
        self.detections.append((self.now, node, suspect, f"rank={rank}", DioVerdict.SUSPICIOUS.value))
        self.log("detect", node, f"suspect={suspect} stage=rank rank={rank} "
                                f"parent_rank={st.recorded_parent_rank} suspicious")
        key = (node, suspect)
        last = self._report_sent.get(key)
        if last is not None and self.now - last < ticks(self.cfg.report_holdoff):
            return
        self._report_sent[key] = self.now
        pkt = WarningPacket(suspect, rank, self.now, node, WarningCode.REPORT)
        self._forward_report(node, pkt)

    def _forward_report(self, node: NodeId, pkt: WarningPacket) -> None:
        st = self.states[node]
        if node == BR_ID:
            self._on_report(pkt)
        elif st.attached and st.parent is not None:
            self.unicast(node, st.parent, pkt)
        else:
            self.log("report_drop", node, f"suspect={pkt.malicious}")

    def _on_warning(self, node: NodeId, src: NodeId, pkt: WarningPacket) -> None:
        if pkt.code == WarningCode.REPORT:
            if self._loop_detected(node, src):
                return
            self._forward_report(node, pkt)
            return
        msg = WarningMessage(pkt.malicious, pkt.rank, pkt.issue_time)
        seen = self._warnings_seen[node]
        if msg.key in seen:
            return
        seen.add(msg.key)
        if node == pkt.malicious:
            return
        st = self.states[node]
        orphaned = apply_warning(st, msg)
        self.log("warning", node, f"malicious={pkt.malicious}")
        self.broadcast(node, pkt)
        if orphaned:
            self._lose_parent(node, f"parent {pkt.malicious} quarantined")

    # --- root: probing and confirmation ------------------------------------------------

    def known_graph(self) -> Dict[NodeId, set]:
        """Topology as learnt by the root from REQP_R acknowledgements."""
        if self._known_graph is not None:
            return self._known_graph
        root = self.states[BR_ID]
        adj: Dict[NodeId, set] = {}

        def link(a, b):
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)

        for nb in root.table:
            link(BR_ID, nb)
        for origin, nbrs in root.known_adjacency.items():
            for nb in nbrs:
                link(origin, nb)
        for route in root.known_routes.values():
            for a, b in zip(route, route[1:]):
                link(a, b)
        self._known_graph = adj
        return adj

    def _shortest_path(self, target: NodeId, avoid: set) -> Optional[Tuple[NodeId, ...]]:
        adj = self.known_graph()
        prev = {BR_ID: None}
        todo = deque([BR_ID])
        while todo:
            cur = todo.popleft()
            if cur == target:
                break
            for nb in sorted(adj.get(cur, ())):
                if nb in prev or (nb in avoid and nb != target):
                    continue
                prev[nb] = cur
                todo.append(nb)
        if target not in prev:
            return None
        path = [target]
        while prev[path[-1]] is not None:
            path.append(prev[path[-1]])
        return tuple(reversed(path))

    def probe_route_for(self, suspect: NodeId) -> Optional[Tuple[NodeId, ...]]:
        """Route from the root through ``suspect`` to one node beyond it if possible.

        Quarantined nodes are never used; other open suspects are avoided
        whenever an alternative exists.
        """
        root = self.states[BR_ID]
        banned = set(root.quarantine)
        others = {n for n, s in self.suspects.items() if s in ("probing", "deferred") and n != suspect}
        path = self._shortest_path(suspect, banned | others) or self._shortest_path(suspect, banned)
        if path is None:
            return None
        adj = self.known_graph()
        beyond = sorted(nb for nb in adj.get(suspect, ())
                        if nb not in path and nb not in banned and nb not in others
                        and nb not in self.suspects)
        return path + (beyond[0],) if beyond else path

    def _ack_timeout(self, route: Sequence[NodeId]) -> int:
        hops = max(1, len(route) - 1)
        worst_rtt = 2 * hops * (self.cfg.hop_latency + self.cfg.hop_jitter)
        return ticks(4 * worst_rtt) + 2

    def _check_route(self, route: Sequence[NodeId]) -> None:
        if len(route) < 2 or route[0] != BR_ID:
            raise ProbeError(f"probe route must start at the root and have a hop: {route!r}")
        root = self.states[BR_ID]
        for a, b in zip(route, route[1:]):
            if b not in self.neighbors.get(a, ()):
                raise ProbeError(f"route hop {a}->{b} is not a link")
            if b in root.quarantine:
                raise ProbeError(f"route crosses quarantined node {b}")

    def _run_stage(self, sess: ProbeSession, name: str, route: Tuple[NodeId, ...]) -> None:
        self._check_route(route)
        stage = ProbeStage(name, tuple(route))
        sess.stage = stage
        spacing = ticks(self.cfg.probe_spacing)
        for i in range(self.cfg.n_probes):
            self.at(self.now + i * spacing, self._send_probe, sess, stage)
        deadline = self.now + (self.cfg.n_probes - 1) * spacing + self._ack_timeout(route)
        self.at(deadline, self._finish_stage, sess, stage)

    def _send_probe(self, sess: ProbeSession, stage: ProbeStage) -> None:
        serial = next(self._serials)
        stage.serials.add(serial)
        stage.sent += 1
        self._serial_stage[serial] = sess
        opts = encode_probe_options(ProbeOptions(serial, stage.route))
        self.unicast(BR_ID, stage.route[1], RplMc(node_address(stage.route[-1]), opts))

    def _on_rpl_mc(self, node: NodeId, src: NodeId, pkt: RplMc) -> None:
        try:
            opts = decode_probe_options(pkt.options)
        except FormatError as exc:
            self.log("malformed", node, str(exc))
            return
        route = opts.route
        if node not in route or address_node(pkt.base) != route[-1]:
            self.log("probe_drop", node, "not on route")
            return
        if self._attacker_drops(node, pkt):
            return
        idx = route.index(node)
        if idx == len(route) - 1:
            self.unicast(node, route[idx - 1], Ack(node, opts.serial, route, (), AckCode.RPL_MC))
            return
        nxt = route[idx + 1]
        if nxt in self.states[node].quarantine:
            self.log("probe_drop", node, f"next hop {nxt} quarantined")
            return
        self.unicast(node, nxt, pkt)

    def _on_ack(self, node: NodeId, src: NodeId, pkt: Ack) -> None:
        if pkt.code == AckCode.REQP_R:
            try:
                actions = handle_reqp_ack(self.states[node], pkt, self.now)
            except FormatError as exc:
                self.log("malformed", node, str(exc))
                return
            if node == BR_ID:
                self._known_graph = None
            self._do(node, actions)
            return
        route = pkt.route
        if node not in route:
            return
        idx = route.index(node)
        if idx > 0:
            self.unicast(node, route[idx - 1], pkt)
            return
        sess = self._serial_stage.get(pkt.seq)
        if sess is not None and sess.stage is not None and pkt.seq in sess.stage.serials:
            sess.stage.serials.discard(pkt.seq)
            sess.stage.acks += 1

    def _finish_stage(self, sess: ProbeSession, stage: ProbeStage) -> None:
        rec = stage.record()
        sess.records.append((stage.name, rec))
        for s in list(stage.serials):
            self._serial_stage.pop(s, None)
        if sess.done is not None:
            sess.done(sess, rec)

    def _open_session(self, suspect, route, done, suspect_rank=INFINITE_RANK) -> ProbeSession:
        sess = ProbeSession(next(self._session_ids), suspect, tuple(route), suspect_rank, done=done)
        self.sessions[sess.sid] = sess
        return sess

    def probe(self, route: Sequence[NodeId], n_probes: Optional[int] = None) -> PdrProbeRecord:
        """Probe one source route now and run the clock until its verdict is due."""
        route = tuple(route)
        self._check_route(route)
        if n_probes is not None and n_probes != self.cfg.n_probes:
            saved, self.cfg = self.cfg, self.cfg.replace(n_probes=n_probes)
        else:
            saved = None
        result = []
        sess = self._open_session(None, route, lambda s, r: result.append(r))
        self._run_stage(sess, "manual", route)
        if saved is not None:
            self.cfg = saved
        while not result:
            if not self._queue:
                raise ProbeError("event queue drained before the probe finished")
            self.run_until(self._queue[0][0])
        return result[0]

    # threshold sampling on clean routes, before any attacker is active

    def _start_threshold_sampling(self) -> None:
        self.log("phase", BR_ID, "threshold_sampling")
        root = self.states[BR_ID]
        pool = sorted(root.known_routes)
        k = min(self.cfg.threshold_samples, len(pool))
        targets = self._probe_rng.sample(pool, k) if k else []
        if not self.cfg.defense:
            targets = []
        self._sample_next(list(targets))

    def _sample_next(self, targets: List[NodeId]) -> None:
        while targets:
            target = targets.pop(0)
            route = self._shortest_path(target, set())
            if route is None or len(route) < 2:
                continue

            def done(sess, rec, targets=targets):
                self.threshold = update_threshold(self.threshold, rec.pdr)
                self.log("pdr_sample", BR_ID,
                         f"target={sess.route[-1]} pdr={rec.pdr:.4f} pdr_t={self.threshold.pdr_t:.4f}")
                self._sample_next(targets)

            sess = self._open_session(None, route, done)
            self._run_stage(sess, "sample", route)
            return
        self.after(0.5, self._start_build)

    # probing of reported suspects

    def _on_report(self, pkt: WarningPacket) -> None:
        suspect, observer = pkt.malicious, pkt.observer
        root = self.states[BR_ID]
        if not self.cfg.defense or suspect == BR_ID or suspect in root.quarantine:
            return
        status = self.suspects.get(suspect)
        if status == "probing":
            return
        if status == "cleared" and self.now - self._cleared_at[suspect] < ticks(self.cfg.probe_cooldown):
            return
        self.log("report", BR_ID, f"suspect={suspect} observer={observer}")
        route = self.probe_route_for(suspect)
        if route is None:
            self.log("probe_error", BR_ID, f"suspect={suspect} unreachable")
            return
        self.suspects[suspect] = "probing"
        self.probed.add(suspect)
        sess = self._open_session(suspect, route, self._suspect_stage_done, pkt.rank)
        try:
            self._run_stage(sess, "through", route)
        except ProbeError as exc:
            self.suspects[suspect] = "deferred"
            self.log("probe_error", BR_ID, f"suspect={suspect} {exc}")

    def _suspect_stage_done(self, sess: ProbeSession, rec: PdrProbeRecord) -> None:
        suspect = sess.suspect
        stage = sess.stage.name
        try:
            verdict = confirm_sinkhole(rec, self.threshold)
        except IndeterminateError as exc:
            self.log("detect", BR_ID, f"suspect={suspect} stage={stage} indeterminate: {exc}")
            self.suspects[suspect] = "deferred"
            return
        self.detections.append((self.now, BR_ID, suspect, f"pdr={rec.pdr:.4f}", f"{stage}:{verdict.value}"))
        self.log("detect", BR_ID,
                 f"suspect={suspect} stage=pdr:{stage} pdr={rec.pdr:.4f} "
                 f"pdr_t={self.threshold.pdr_t:.4f} {verdict.value}")
        cut = sess.route.index(suspect)
        to_suspect = sess.route[:cut + 1]
        prefix = sess.route[:cut]
        if stage == "through":
            if verdict is ProbeVerdict.CLEARED:
                return self._clear(suspect)
            if len(sess.route) > len(to_suspect):
                return self._next_stage(sess, "to_suspect", to_suspect)
            stage, verdict = "to_suspect", verdict
        if stage == "to_suspect":
            if verdict is ProbeVerdict.CLEARED:
                # the loss lies beyond the suspect
                return self._clear(suspect)
            if len(prefix) < 2:
                return self._confirm(sess)
            return self._next_stage(sess, "prefix", prefix)
        if stage == "prefix":
            if verdict is ProbeVerdict.CLEARED:
                return self._confirm(sess)
            self.suspects[suspect] = "deferred"
            self.log("detect", BR_ID, f"suspect={suspect} deferred: loss before suspect")

    def _next_stage(self, sess: ProbeSession, name: str, route) -> None:
        try:
            self._run_stage(sess, name, route)
        except ProbeError as exc:
            # the route changed under the session (e.g. a hop got quarantined)
            self.suspects[sess.suspect] = "deferred"
            self.log("probe_error", BR_ID, f"suspect={sess.suspect} {exc}")

    def _clear(self, suspect: NodeId) -> None:
        self.suspects[suspect] = "cleared"
        self._cleared_at[suspect] = self.now

    def _confirm(self, sess: ProbeSession) -> None:
        self.quarantine(sess.suspect, sess.suspect_rank)

    def quarantine(self, malicious: NodeId, rank: int = INFINITE_RANK) -> None:
        """Quarantine ``malicious`` at the root and flood the warning."""
        root = self.states[BR_ID]
        if malicious == BR_ID or malicious in root.quarantine:
            return
        self.suspects[malicious] = "quarantined"
        graph = DodagGraph.from_states(self.states)
        orphans = tuple(graph.descendants(malicious))
        rank = rank if rank != INFINITE_RANK else root.neighbor_ranks.get(malicious, INFINITE_RANK)
        pkt = WarningPacket(malicious, min(rank, INFINITE_RANK), self.now, BR_ID, WarningCode.QUARANTINE)
        msg = WarningMessage(malicious, pkt.rank, pkt.issue_time)
        self._warnings_seen[BR_ID].add(msg.key)
        apply_warning(root, msg)
        self.log("quarantine_issue", BR_ID, f"malicious={malicious} orphans={len(orphans)}")
        self.broadcast(BR_ID, pkt)
        settle = 3 * self.cfg.attach_window + 1.0
        self.after(settle, self._quarantine_report, self.now, malicious, orphans)

    def _quarantine_report(self, issued: int, malicious: NodeId, orphans: Tuple[NodeId, ...]) -> None:
        re = tuple(o for o in orphans if self.states[o].attached)
        un = tuple(o for o in orphans if not self.states[o].attached)
        self.quarantines.append(QuarantineEvent(issued, malicious, orphans, re, un))
        self.log("quarantine", BR_ID, f"malicious={malicious} reattached={len(re)} unattached={len(un)}")

    # --- inspection -----------------------------------------------------------------

    def graph(self) -> DodagGraph:
        return DodagGraph.from_states(self.states)

    @property
    def quarantined(self) -> Tuple[NodeId, ...]:
        return tuple(sorted(self.states[BR_ID].quarantine))

    def data_in_flight(self) -> int:
        return (sum(self.data_sent.values()) - sum(self.data_delivered.values())
                - sum(self.data_dropped.values()))
