"""Seeded experiment instances: grids, degree-capped random graphs, Potts costs.

Randomness comes from `numpy.random.Generator` (PCG64) built from
`SeedSequence(seed, spawn_key=(purpose,))`, one stream per purpose, so the
graph drawn for a seed does not depend on how its costs are drawn.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from ..const import DEFAULT_ALPHA_RANGE, DEFAULT_BETA_CHOICES, DEFAULT_LABELS
from .errors import ConfigError, Unrepairable
from .model import Edge, GraphTopology, PairwiseModel, PotentialVector


class Stream(IntEnum):
    """Independent random streams derived from one seed."""

    TOPOLOGY = 0
    COSTS = 1


def rng_for(seed: int, stream: Stream) -> np.random.Generator:
    """Generator for one purpose of a seed."""
    sequence = np.random.SeedSequence(seed, spawn_key=(int(stream),))
    return np.random.default_rng(sequence)


@dataclass(frozen=True)
class PottsConfig:
    """Parameters of a multi-label Potts model.

    Attributes:
        d: Label count.
        alpha_range: `(low, high)` of the uniform vertex costs.
        beta_choices: Values the diagonal of an edge cost matrix is drawn from.
        seed: Non-negative 64-bit seed.
    """

    d: int = DEFAULT_LABELS
    alpha_range: tuple[float, float] = DEFAULT_ALPHA_RANGE
    beta_choices: tuple[float, ...] = field(default=DEFAULT_BETA_CHOICES)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ConfigError(f"d must be at least 2, got {self.d}")
        low, high = self.alpha_range
        if low > high:
            raise ConfigError(f"alpha_range low {low} exceeds high {high}")
        if not self.beta_choices:
            raise ConfigError("beta_choices must not be empty")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must fit in 64 unsigned bits, got {self.seed}")


# -----------------------------------------------------------------------------
# Topologies
# -----------------------------------------------------------------------------


def grid_graph(side: int, d: int = DEFAULT_LABELS) -> GraphTopology:
    """4-connected `side x side` grid; vertex `r * side + c` is at row r, column c."""
    if side < 2:
        raise ValueError(f"grid side must be at least 2, got {side}")
    edges: list[Edge] = []
    for r in range(side):
        for c in range(side):
            v = r * side + c
            if c + 1 < side:
                edges.append((v, v + 1))
            if r + 1 < side:
                edges.append((v, v + side))
    return GraphTopology.from_edges(side * side, d, sorted(edges))


def erdos_renyi_probability(n: int) -> float:
    """Edge probability `1.1 log n / n`, clipped to 1."""
    return min(1.0, 1.1 * math.log(n) / n)


def _nearest_open_vertex(
    v: int, degree: Sequence[int], cap: int | None
) -> int | None:
    n = len(degree)
    for distance in range(1, n):
        for u in (v - distance, v + distance):
            if 0 <= u < n and (cap is None or degree[u] < cap):
                return u
    return None


def erdos_renyi(
    n: int,
    seed: int,
    max_degree: int | None = None,
    d: int = DEFAULT_LABELS,
) -> GraphTopology:
    """Random graph with independent edges and an optional degree cap.

    Pairs are visited in lexicographic order and kept with probability
    `1.1 log n / n`; a kept pair is skipped when either endpoint is already at
    `max_degree`. Every vertex left isolated is then attached to the nearest
    vertex by index that still has room (lower index wins a tie).

    Args:
        n: Vertex count, at least 2.
        seed: Non-negative seed.
        max_degree: Optional cap on every vertex degree.
        d: Label count recorded on the topology.

    Returns:
        A topology satisfying the model invariants.

    Raises:
        Unrepairable: The cap leaves an isolated vertex with nowhere to attach.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if max_degree is not None and max_degree < 1:
        raise ValueError(f"max_degree must be at least 1, got {max_degree}")

    rng = rng_for(seed, Stream.TOPOLOGY)
    p = erdos_renyi_probability(n)
    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(rows.size) < p

    degree = [0] * n
    edges: set[Edge] = set()
    for i, j in zip(rows[keep].tolist(), cols[keep].tolist()):
        if max_degree is not None and max(degree[i], degree[j]) >= max_degree:
            continue
        edges.add((i, j))
        degree[i] += 1
        degree[j] += 1

    for v in range(n):
        if degree[v]:
            continue
        u = _nearest_open_vertex(v, degree, max_degree)
        if u is None:
            raise Unrepairable(
                f"vertex {v} is isolated and every other vertex is at the cap "
                f"{max_degree}"
            )
        edges.add((min(u, v), max(u, v)))
        degree[u] += 1
        degree[v] += 1

    return GraphTopology.from_edges(n, d, sorted(edges))


# -----------------------------------------------------------------------------
# Costs
# -----------------------------------------------------------------------------


def potts_costs(topology: GraphTopology, config: PottsConfig) -> PotentialVector:
    """Draw Potts costs: uniform vertex costs, one diagonal value per edge.

    Raises:
        ConfigError: `config.d` differs from the topology's label count.
    """
    if config.d != topology.d:
        raise ConfigError(f"config has d={config.d}, topology has d={topology.d}")
    rng = rng_for(config.seed, Stream.COSTS)
    n, d, m = topology.n, topology.d, topology.num_edges
    low, high = config.alpha_range
    vertex = rng.uniform(low, high, size=(n, d))
    betas = rng.choice(np.asarray(config.beta_choices, dtype=np.float64), size=m)
    edge = np.zeros((m, d, d))
    diag = np.arange(d)
    edge[:, diag, diag] = betas[:, None]
    return PotentialVector.from_arrays(vertex, edge)


def potts_model(topology: GraphTopology, config: PottsConfig) -> PairwiseModel:
    """Validated Potts model on a topology."""
    return PairwiseModel.create(topology, potts_costs(topology, config))
