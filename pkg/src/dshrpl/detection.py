"""Two-stage sinkhole detection: the rank rule on DIOs, then PDR probing."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .errors import IndeterminateError, NotApplicableError
from .types import NodeId, Rank


class DioVerdict(str, Enum):
    BENIGN = "benign"
    SUSPICIOUS = "suspicious"


class ProbeVerdict(str, Enum):
    CONFIRMED = "confirmed"
    CLEARED = "cleared"


@dataclass(frozen=True)
class RankObservation:
    node_rank: Rank
    parent_rank: Optional[Rank]    # as recorded when the routing entry was set
    sender_rank: Rank
    sender: NodeId


def dnr_p(node_rank: Rank, parent_rank: Optional[Rank]) -> int:
    """Rank distance between a node and its parent."""
    if parent_rank is None:
        raise NotApplicableError("node has no parent")
    return abs(parent_rank - node_rank)


def dsn_ni(sender_rank: Rank, node_rank: Rank) -> int:
    """Rank distance between a DIO's sender and the receiving node."""
    return abs(sender_rank - node_rank)


def classify_dio(obs: RankObservation) -> DioVerdict:
    if dsn_ni(obs.sender_rank, obs.node_rank) > dnr_p(obs.node_rank, obs.parent_rank):
        return DioVerdict.SUSPICIOUS
    return DioVerdict.BENIGN


@dataclass(frozen=True)
class PdrProbeRecord:
    route: Tuple[NodeId, ...]
    mc_sent: int
    acks_received: int

    def __post_init__(self):
        if not 0 <= self.acks_received <= self.mc_sent:
            raise ValueError("acks_received must lie in [0, mc_sent]")

    @property
    def pdr(self) -> float:
        if self.mc_sent == 0:
            raise IndeterminateError("no RPL-MC sent on this route")
        return self.acks_received / self.mc_sent


@dataclass(frozen=True)
class PdrThresholdState:
    """Running statistics over clean-route PDR samples.

    ``pdr_t`` is the detection threshold (mean minus one population standard
    deviation); ``lt_p``/``ut_p`` bracket mean -/+ two deviations, clamped to
    [0, 1], and only serve to flag abnormal samples.
    """

    samples: Tuple[float, ...] = ()
    pdr_a: Optional[float] = None
    sd: Optional[float] = None
    pdr_t: Optional[float] = None
    lt_p: Optional[float] = None
    ut_p: Optional[float] = None

    def is_abnormal(self, pdr: float) -> bool:
        if self.lt_p is None:
            return False
        return pdr < self.lt_p or pdr > self.ut_p


def update_threshold(state: PdrThresholdState, new_sample: float) -> PdrThresholdState:
    if not 0 <= new_sample <= 1:
        raise ValueError(f"PDR sample {new_sample} outside [0, 1]")
    samples = state.samples + (float(new_sample),)
    arr = np.asarray(samples, dtype=float)
    mean = float(arr.mean())
    sd = float(arr.std(ddof=0))
    return PdrThresholdState(
        samples=samples,
        pdr_a=mean,
        sd=sd,
        pdr_t=mean - sd,
        lt_p=max(0.0, mean - 2 * sd),
        ut_p=min(1.0, mean + 2 * sd),
    )


def confirm_sinkhole(record: PdrProbeRecord, state: PdrThresholdState) -> ProbeVerdict:
    """Confirmed only when the route's PDR is strictly below the threshold."""
    if record.mc_sent == 0:
        raise IndeterminateError("re-probe required: no RPL-MC sent")
    if state.pdr_t is None:
        raise IndeterminateError("no clean-route PDR history to compare against")
    if record.pdr < state.pdr_t:
        return ProbeVerdict.CONFIRMED
    return ProbeVerdict.CLEARED
