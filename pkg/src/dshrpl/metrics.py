"""Detection and delivery metrics over end-of-run node classifications.

Rates are percentages. A rate whose denominator is empty is not applicable
and comes back as ``None`` (never as 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0   # attackers quarantined
    tn: int = 0   # honest nodes never quarantined
    fp: int = 0   # honest nodes quarantined
    fn: int = 0   # attackers never quarantined

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def classify(cls, attackers: Iterable[int], honest: Iterable[int],
                 quarantined: Iterable[int]) -> "ConfusionCounts":
        attackers, honest, q = set(attackers), set(honest), set(quarantined)
        return cls(tp=len(attackers & q), tn=len(honest - q),
                   fp=len(honest & q), fn=len(attackers - q))

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.tn + other.tn,
                               self.fp + other.fp, self.fn + other.fn)


def _pct(num: int, den: int) -> Optional[float]:
    if den == 0:
        return None
    return 100.0 * num / den


def detection_rate(c: ConfusionCounts) -> Optional[float]:
    return _pct(c.tp, c.tp + c.fn)


def false_positive_rate(c: ConfusionCounts) -> Optional[float]:
    return _pct(c.fp, c.fp + c.tn)


def false_negative_rate(c: ConfusionCounts) -> Optional[float]:
    # share of attackers that were never quarantined
    return _pct(c.fn, c.fn + c.tp)


def packet_delivery_rate(sent: Mapping[int, int], delivered: Mapping[int, int]) -> Optional[float]:
    """Delivered data packets over sent data packets, summed across nodes."""
    total = sum(sent.values())
    got = sum(delivered.get(n, 0) for n in sent)
    if any(delivered.get(n, 0) > s for n, s in sent.items()):
        raise ValueError("a node cannot deliver more packets than it sent")
    return _pct(got, total)


@dataclass(frozen=True)
class MetricsRow:
    scenario: int
    attack_interval: float
    defense_mode: str
    seed: int
    dr: Optional[float]
    fpr: Optional[float]
    fnr: Optional[float]
    pdr: Optional[float]
    runtime: float = 0.0
    error: Optional[str] = None

    def __post_init__(self):
        for name in ("dr", "fpr", "fnr", "pdr"):
            v = getattr(self, name)
            if v is not None and not 0 <= v <= 100:
                raise ValueError(f"{name}={v} outside [0, 100]")

    @classmethod
    def from_counts(cls, scenario, attack_interval, defense_mode, seed, counts: ConfusionCounts,
                    sent, delivered, runtime=0.0) -> "MetricsRow":
        return cls(scenario, attack_interval, defense_mode, seed,
                   detection_rate(counts), false_positive_rate(counts),
                   false_negative_rate(counts), packet_delivery_rate(sent, delivered), runtime)
