"""One full run, start to finish, reduced to comparable results."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Dict, Tuple

from ..metrics import ConfusionCounts, MetricsRow
from ..types import BR_ID, DodagGraph, NodeId
from .config import ScenarioConfig
from .engine import LinkTally, QuarantineEvent, Simulation
from .trace import EventTrace


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    trace: EventTrace
    counts: ConfusionCounts
    sent: Dict[NodeId, int]              # data packets generated per honest source
    delivered: Dict[NodeId, int]         # of those, decrypted correctly at the root
    attackers: Tuple[NodeId, ...]
    quarantined: Tuple[NodeId, ...]
    unprobed_attackers: Tuple[NodeId, ...]
    quarantines: Tuple[QuarantineEvent, ...]
    links: Dict[str, LinkTally]
    graph: DodagGraph
    runtime: float
    simulation: Simulation = None

    @property
    def digest(self) -> int:
        return self.trace.digest

    @property
    def delivery_fraction(self) -> float:
        total = sum(self.sent.values())
        return sum(self.delivered.values()) / total if total else float("nan")

    def metrics_row(self, scenario: int = 0, defense_mode: str = None) -> MetricsRow:
        mode = defense_mode or ("dsh-rpl" if self.config.defense else "off")
        return MetricsRow.from_counts(scenario, self.config.attack_interval, mode, self.config.seed,
                                      self.counts, self.sent, self.delivered, self.runtime)


def run_scenario(config: ScenarioConfig, keep_simulation: bool = False) -> ScenarioResult:
    """Run one scenario; returns the trace, confusion counts and delivery tallies.

    TP are attackers the root quarantined, FN attackers it never did, FP
    quarantined honest nodes and TN honest nodes left alone.
    """
    config.validate()
    started = time.perf_counter()
    sim = Simulation(config).run()
    attackers = tuple(sorted(sim.attacker_order))
    honest = [n for n in sim.node_ids if n != BR_ID and n not in attackers]
    q = sim.quarantined
    counts = ConfusionCounts.classify(attackers, honest, q)
    sent = {n: sim.data_sent.get(n, 0) for n in sim.honest_sources}
    delivered = {n: sim.data_delivered.get(n, 0) for n in sim.honest_sources}
    return ScenarioResult(
        config=config,
        trace=sim.trace,
        counts=counts,
        sent=sent,
        delivered=delivered,
        attackers=attackers,
        quarantined=q,
        unprobed_attackers=tuple(a for a in attackers if a not in sim.probed),
        quarantines=tuple(sim.quarantines),
        links=sim.links,
        graph=sim.graph(),
        runtime=time.perf_counter() - started,
        simulation=sim if keep_simulation else None,
    )
