"""Seeded node placement and unit-disk connectivity."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..errors import TopologyError
from ..types import BR_ID
from .config import ScenarioConfig, derive_seed


@dataclass(frozen=True)
class Topology:
    neighbors: Dict[int, Tuple[int, ...]]
    positions: Optional[np.ndarray] = None    # (n, 2) metres; None for explicit edge lists
    attempt: int = 0

    @property
    def nodes(self) -> Tuple[int, ...]:
        return tuple(sorted(self.neighbors))

    def reachable_from(self, root: int = BR_ID) -> set:
        seen = {root}
        todo = deque([root])
        while todo:
            for nb in self.neighbors[todo.popleft()]:
                if nb not in seen:
                    seen.add(nb)
                    todo.append(nb)
        return seen

    def connected(self) -> bool:
        return len(self.reachable_from()) == len(self.neighbors)


def unit_disk(positions: np.ndarray, radio_range: float) -> Dict[int, Tuple[int, ...]]:
    """Bidirectional links between every pair at distance <= ``radio_range``."""
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=-1))
    linked = dist <= radio_range
    np.fill_diagonal(linked, False)
    return {i: tuple(int(j) for j in np.flatnonzero(linked[i])) for i in range(len(positions))}


def from_edges(num_nodes: int, edges) -> Topology:
    nbrs = {i: set() for i in range(num_nodes)}
    for a, b in edges:
        nbrs[a].add(b)
        nbrs[b].add(a)
    return Topology({i: tuple(sorted(s)) for i, s in nbrs.items()})


def place(config: ScenarioConfig, attempt: int) -> np.ndarray:
    rng = np.random.default_rng(derive_seed(config.seed, "topology", attempt))
    w, h = config.area
    pos = np.empty((config.num_nodes, 2))
    pos[0] = (w / 2, h / 2)
    if config.num_nodes > 1:
        pos[1:] = rng.uniform((0.0, 0.0), (w, h), size=(config.num_nodes - 1, 2))
    return pos


def generate_topology(config: ScenarioConfig) -> Topology:
    """Place nodes uniformly (border router at the centre) and link them.

    A placement that leaves any node unreachable from the border router is
    redrawn with the next sub-seed, up to ``topology_retries`` times.
    """
    if config.edges is not None:
        topo = from_edges(config.num_nodes, config.edges)
        if not topo.connected():
            raise TopologyError("explicit topology is not connected to the border router")
        return topo
    for attempt in range(config.topology_retries):
        pos = place(config, attempt)
        topo = Topology(unit_disk(pos, config.radio_range), pos, attempt)
        if topo.connected():
            return topo
    raise TopologyError(
        f"no BR-connected placement of {config.num_nodes} nodes after {config.topology_retries} draws"
    )
