"""Scenario configuration and its plain-text ``key = value`` file format."""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, Optional, Tuple

from ..dodag import RankParams
from ..errors import ConfigurationError
from ..trust import ReliabilityWeights

SECOND = 1_000_000  # simulation ticks (microseconds) per second


def ticks(seconds: float) -> int:
    return int(round(seconds * SECOND))


def derive_seed(seed: int, *labels) -> int:
    """Independent 64-bit sub-seed for one named random stream."""
    text = "/".join([str(seed), *map(str, labels)])
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "big")


@dataclass(frozen=True)
class ScenarioConfig:
    num_nodes: int = 50
    area: Tuple[float, float] = (200.0, 200.0)
    radio_range: float = 50.0
    duration: float = 200.0
    sinkhole_rate: float = 0.0
    attack_interval: float = 2.0
    stagger: bool = False
    seed: int = 1
    defense: bool = True
    # reliability calculus
    w1: float = 0.3
    w2: float = 0.4
    w3: float = 0.3
    alpha: float = 0.7
    delta_t: float = 10.0
    trust_cap: int = 20
    warmup_rounds: int = 5
    # ranks
    min_h: int = 128
    max_h: int = 1024
    root_base: Optional[int] = None
    reliability_threshold: float = 0.5
    reliability_scale: int = 100
    # detection
    n_probes: int = 10
    threshold_samples: int = 5
    probe_spacing: float = 0.01
    probe_cooldown: float = 30.0
    report_holdoff: float = 10.0
    # attackers
    drop_probability: float = 1.0
    attack_start: Optional[float] = None
    attackers: Optional[Tuple[int, ...]] = None
    # traffic and encryption
    data_rate: float = 0.2
    he_prime_bits: int = 64
    aggregation_window: float = 0.0
    transaction_size: int = 77
    # link layer and timers
    hop_latency: float = 0.002
    hop_jitter: float = 0.001
    ambient_loss: float = 0.0
    dio_period: float = 5.0
    attach_window: float = 1.0
    # energy, milli-units
    initial_energy: int = 1_000_000
    tx_cost: int = 5
    rx_cost: int = 2
    byte_cost: int = 1
    # explicit topology: (a, b) link pairs; None draws a random placement
    edges: Optional[Tuple[Tuple[int, int], ...]] = None
    topology_retries: int = 100
    keep_records: bool = True

    @property
    def weights(self) -> ReliabilityWeights:
        return ReliabilityWeights(self.w1, self.w2, self.w3, self.alpha, self.delta_t, self.trust_cap)

    @property
    def rank_params(self) -> RankParams:
        return RankParams(self.min_h, self.max_h, self.root_base,
                          self.reliability_threshold, self.reliability_scale)

    @property
    def num_attackers(self) -> int:
        if self.attackers is not None:
            return len(self.attackers)
        return int(round(self.sinkhole_rate * (self.num_nodes - 1)))

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def validate(self) -> "ScenarioConfig":
        def need(cond, msg):
            if not cond:
                raise ConfigurationError(msg)

        need(self.num_nodes >= 1, "num_nodes must be at least 1")
        need(self.area[0] > 0 and self.area[1] > 0, "area must be positive")
        need(self.radio_range > 0, "radio_range must be positive")
        need(self.duration > 0, "duration must be positive")
        need(0 <= self.sinkhole_rate <= 1, "sinkhole_rate outside [0, 1]")
        need(0 <= self.drop_probability <= 1, "drop_probability outside [0, 1]")
        need(0 <= self.ambient_loss < 1, "ambient_loss outside [0, 1)")
        need(self.attack_interval >= 0, "attack_interval must be non-negative")
        need(self.n_probes >= 1, "n_probes must be at least 1")
        need(self.threshold_samples >= 1, "threshold_samples must be at least 1")
        need(self.warmup_rounds >= 1, "warmup_rounds must be at least 1")
        need(self.data_rate >= 0, "data_rate must be non-negative")
        need(self.he_prime_bits >= 16, "he_prime_bits must be at least 16")
        need(self.hop_latency > 0 and self.hop_jitter >= 0, "bad link latency")
        need(self.dio_period > 0 and self.attach_window > 0, "timers must be positive")
        need(self.initial_energy > 0, "initial_energy must be positive")
        self.weights
        self.rank_params
        if self.edges is not None:
            ids = {i for e in self.edges for i in e}
            need(all(0 <= i < self.num_nodes for i in ids), "edge endpoint outside node range")
            need(all(a != b for a, b in self.edges), "self-loop in edges")
        if self.attackers is not None:
            need(all(0 < a < self.num_nodes for a in self.attackers),
                 "attackers must be non-root node ids")
        return self


_FIELD_TYPES = {f.name: f for f in fields(ScenarioConfig)}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"not a boolean: {text!r}")


def parse_value(key: str, text: str):
    """Convert one textual config value to the type of field ``key``."""
    if key not in _FIELD_TYPES:
        raise ConfigurationError(f"unknown config key {key!r}")
    text = text.strip()
    default = _FIELD_TYPES[key].default
    try:
        if key == "area":
            parts = text.replace("x", ",").replace("*", ",").split(",")
            w, h = (float(p) for p in parts)
            return (w, h)
        if key == "edges":
            if text.lower() in ("", "none"):
                return None
            pairs = []
            for item in text.split(","):
                a, b = item.strip().split("-")
                pairs.append((int(a), int(b)))
            return tuple(pairs)
        if key == "attackers":
            if text.lower() in ("", "none"):
                return None
            return tuple(int(x) for x in text.split(",") if x.strip())
        if key in ("root_base", "attack_start"):
            if text.lower() in ("", "none"):
                return None
            return int(text) if key == "root_base" else float(text)
        if isinstance(default, bool):
            return _parse_bool(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad value for {key}: {text!r}") from exc
    raise ConfigurationError(f"unsupported key {key!r}")


def format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple) and value and isinstance(value[0], tuple):
        return ",".join(f"{a}-{b}" for a, b in value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def parse_lines(lines) -> Dict[str, str]:
    out = {}
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {n}: expected key = value")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def config_from_mapping(values: Dict[str, str], base: Optional[ScenarioConfig] = None) -> ScenarioConfig:
    base = base or ScenarioConfig()
    changes = {k: parse_value(k, v) for k, v in values.items()}
    return base.replace(**changes).validate()


def load_config(path) -> ScenarioConfig:
    text = Path(path).read_text(encoding="utf-8")
    return config_from_mapping(parse_lines(text.splitlines()))


def dump_config(cfg: ScenarioConfig) -> str:
    return "".join(f"{f.name} = {format_value(getattr(cfg, f.name))}\n" for f in fields(cfg))
