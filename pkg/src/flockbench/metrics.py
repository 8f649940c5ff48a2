"""
Flocking performance measures, computed per configuration.

A sub-flock is a connected component of the proximity net.  Four measures
are reported per step: number of components (fragmentation), maximum
component diameter (cohesion; None when all agents are isolated), velocity
convergence (mean squared deviation from the component-mean velocity,
averaged over components) and irregularity (mean per-component sample std
dev of nearest-neighbor distances; 0 when no component has two members).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FlockConfiguration, ProximityNet, proximity_net

__all__ = [
    "MetricsRecord",
    "connected_components",
    "max_component_diameter",
    "velocity_convergence",
    "irregularity",
    "evaluate_metrics",
]


@dataclass(frozen=True)
class MetricsRecord:
    num_components: int
    max_diameter: float | None
    velocity_convergence: float
    irregularity: float

    def __post_init__(self):
        if self.num_components < 1:
            raise ValueError("num_components must be at least 1")
        if self.max_diameter is not None and self.max_diameter <= 0:
            raise ValueError("max_diameter must be positive or None")
        if self.velocity_convergence < 0 or self.irregularity < 0:
            raise ValueError("velocity_convergence and irregularity are nonnegative")


class _UnionFind:
    """Union-find with path compression; representative = smallest member."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if ra < rb:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb


def connected_components(net: ProximityNet) -> list:
    """Partition agent indices into connected components of the net.

    Output is a list of sets ordered by each component's smallest member.
    """
    uf = _UnionFind(net.n)
    for i, j in net.edges:
        uf.union(i, j)
    groups = {}
    for i in range(net.n):
        groups.setdefault(uf.find(i), set()).add(i)
    return [groups[root] for root in sorted(groups)]


def max_component_diameter(
    config: FlockConfiguration, components: list
) -> float | None:
    """Largest pairwise distance inside any component with >= 2 members.

    None when every component is a singleton (the diameter's max runs over
    an empty set in that case).
    """
    pos = config.positions
    best = None
    for comp in components:
        if len(comp) < 2:
            continue
        idx = sorted(comp)
        sub = pos[idx]
        diff = sub[:, None, :] - sub[None, :, :]
        diam = float(np.sqrt((diff * diff).sum(axis=-1)).max())
        if best is None or diam > best:
            best = diam
    return best


def velocity_convergence(config: FlockConfiguration, components: list) -> float:
    """Average over components of the mean squared deviation from the
    component's mean velocity.  Singletons contribute zero."""
    vel = config.velocities
    total = 0.0
    for comp in components:
        idx = sorted(comp)
        v = vel[idx]
        dev = v - v.mean(axis=0)
        total += float((dev * dev).sum()) / len(idx)
    return total / len(components)


def irregularity(config: FlockConfiguration, components: list) -> float:
    """Mean over non-singleton components of the sample standard deviation
    of each member's nearest-neighbor distance (nearest within the same
    component).  0 when all agents are isolated."""
    pos = config.positions
    stds = []
    for comp in components:
        if len(comp) < 2:
            continue
        idx = sorted(comp)
        sub = pos[idx]
        diff = sub[:, None, :] - sub[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=-1))
        np.fill_diagonal(dist, np.inf)
        nearest = dist.min(axis=1)
        stds.append(float(nearest.std(ddof=1)))
    if not stds:
        return 0.0
    return sum(stds) / len(stds)


def evaluate_metrics(config: FlockConfiguration, r: float) -> MetricsRecord:
    """All four measures of one configuration at interaction radius r."""
    net = proximity_net(config, r)
    comps = connected_components(net)
    return MetricsRecord(
        num_components=len(comps),
        max_diameter=max_component_diameter(config, comps),
        velocity_convergence=velocity_convergence(config, comps),
        irregularity=irregularity(config, comps),
    )
