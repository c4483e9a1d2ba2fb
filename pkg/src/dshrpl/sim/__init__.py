"""Deterministic discrete-event simulation of the secured DODAG."""

from .attacker import AttackerProfile, step_attacker
from .config import ScenarioConfig, config_from_mapping, derive_seed, dump_config, load_config
from .engine import Simulation
from .scenario import ScenarioResult, run_scenario
from .topology import Topology, generate_topology
from .trace import EventTrace, TraceRecord

__all__ = [
    "AttackerProfile", "EventTrace", "ScenarioConfig", "ScenarioResult", "Simulation",
    "Topology", "TraceRecord", "config_from_mapping", "derive_seed", "dump_config",
    "generate_topology", "load_config", "run_scenario", "step_attacker",
]
