"""Sinkhole attacker behaviour."""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import List, Union

from ..packets import RELIABILITY_SCALE, Data, Dio, RplMc
from ..types import NodeId, Rank


@dataclass(frozen=True)
class AttackerProfile:
    node: NodeId
    advertise_rank: Rank = 0
    drop_probability: float = 1.0
    activation_time: int = 0          # microseconds

    def active(self, now: int) -> bool:
        return now >= self.activation_time


@dataclass(frozen=True)
class DioEmission:
    now: int
    dio: Dio          # what an honest node would send


@dataclass(frozen=True)
class Transit:
    now: int
    packet: object    # DATA or RPL-MC reaching the attacker


@dataclass(frozen=True)
class Emit:
    dio: Dio


@dataclass(frozen=True)
class Forward:
    packet: object


@dataclass(frozen=True)
class Drop:
    packet: object


def step_attacker(profile: AttackerProfile, event: Union[DioEmission, Transit],
                  rng: random.Random) -> List[object]:
    """Decide what the attacker does with one event.

    Dormant attackers behave honestly. Once active, DIOs advertise the lure
    rank with full reliability and each transiting DATA or RPL-MC packet is
    dropped with the profile's probability (one draw per packet). Other
    control traffic is forwarded.
    """
    if isinstance(event, DioEmission):
        if not profile.active(event.now):
            return [Emit(event.dio)]
        return [Emit(replace(event.dio, rank=profile.advertise_rank, reliability=RELIABILITY_SCALE))]
    if not profile.active(event.now) or not isinstance(event.packet, (Data, RplMc)):
        return [Forward(event.packet)]
    if rng.random() < profile.drop_probability:
        return [Drop(event.packet)]
    return [Forward(event.packet)]
