"""Small hand-checkable networks shared by several test modules."""

from dshrpl.sim import ScenarioConfig
from dshrpl.state import NodeState
from dshrpl.types import EnergyLevel

# BR(0) hears N1, N2, N3; N4 hangs off N1, N5 off N3 and can also hear N4.
# With unit ranks every first-hop node is rank 2 and N4/N5 are rank 3.
SIX_NODE_EDGES = ((0, 1), (0, 2), (0, 3), (1, 4), (3, 5), (4, 5))

SIX_NODE = ScenarioConfig(
    num_nodes=6,
    edges=SIX_NODE_EDGES,
    attackers=(3,),
    min_h=1,
    root_base=1,
    reliability_scale=0,
    duration=120,
    seed=1,
)

SIX_NODE_CLEAN = SIX_NODE.replace(attackers=())


def small(**kw):
    """A 20-node network that runs in well under a second."""
    base = dict(num_nodes=20, area=(120.0, 120.0), duration=90, seed=3)
    base.update(kw)
    return ScenarioConfig(**base)


def network(edges, n, rel=1.0, overrides=None):
    """Node states whose own opinion of every neighbour is ``rel``."""
    nbrs = {i: set() for i in range(n)}
    for a, b in edges:
        nbrs[a].add(b)
        nbrs[b].add(a)
    states = {i: NodeState(i, EnergyLevel.full(100)) for i in range(n)}
    for i, ns in nbrs.items():
        states[i].opinions = {j: (overrides or {}).get((i, j), rel) for j in ns}
    return states, {i: sorted(ns) for i, ns in nbrs.items()}
