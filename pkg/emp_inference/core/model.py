"""Pairwise model data types, validation and constraint-violation measurement.

A model is a graph `G = (V, E)` with `n` vertices, edges stored canonically as
`(i, j)` with `i < j`, and `d` labels per vertex. Costs are `C = -theta`:
one d-vector per vertex and one d x d matrix per edge (rows index the state of
the lower vertex). Pseudo-marginals are kept in the log domain.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property
from typing import Any, cast

import numpy as np
import numpy.typing as npt

from .errors import (
    ConfigError,
    DimensionMismatch,
    DuplicateEdge,
    IsolatedVertex,
    NonFiniteCost,
)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]
Edge = tuple[int, int]

# -----------------------------------------------------------------------------
# Topology
# -----------------------------------------------------------------------------


class Side(StrEnum):
    """Which marginalization constraint of an edge is meant."""

    ROW = "row"
    COL = "col"

    @property
    def index(self) -> int:
        """Column index of this side in violation tables."""
        return 0 if self is Side.ROW else 1


@dataclass(frozen=True)
class GraphTopology:
    """Vertex set, canonical edge list and label count of a pairwise model.

    Attributes:
        n: Number of vertices.
        d: Number of labels per vertex.
        edges: Edge list; edge ids are positions in this tuple.
        degree: Per-vertex edge count.
    """

    n: int
    d: int
    edges: tuple[Edge, ...]
    degree: tuple[int, ...] = field(default=())

    @classmethod
    def from_edges(
        cls, n: int, d: int, edges: Iterable[Sequence[int]]
    ) -> GraphTopology:
        """Build a topology and its degree statistics.

        No validation happens here; see `validate_model`.

        Args:
            n: Vertex count.
            d: Label count.
            edges: Vertex pairs.

        Returns:
            A `GraphTopology`.
        """
        edge_list = tuple((int(e[0]), int(e[1])) for e in edges)
        degree = [0] * max(n, 0)
        for i, j in edge_list:
            for v in (i, j):
                if 0 <= v < n:
                    degree[v] += 1
        return cls(n=int(n), d=int(d), edges=edge_list, degree=tuple(degree))

    @property
    def num_edges(self) -> int:
        """Number of edges."""
        return len(self.edges)

    @property
    def max_degree(self) -> int:
        """deg(G), the largest vertex degree."""
        return max(self.degree, default=0)

    @cached_property
    def edge_i(self) -> IntArray:
        """Row (lower) vertex of every edge."""
        return np.array([e[0] for e in self.edges], dtype=np.int64)

    @cached_property
    def edge_j(self) -> IntArray:
        """Column (upper) vertex of every edge."""
        return np.array([e[1] for e in self.edges], dtype=np.int64)

    @cached_property
    def incident(self) -> tuple[tuple[int, ...], ...]:
        """Edge ids incident on each vertex, in increasing order."""
        out: list[list[int]] = [[] for _ in range(self.n)]
        for e, (i, j) in enumerate(self.edges):
            out[i].append(e)
            out[j].append(e)
        return tuple(tuple(ids) for ids in out)

    @cached_property
    def row_edges(self) -> tuple[tuple[int, ...], ...]:
        """Edge ids where the vertex is the row vertex (N_r)."""
        out: list[list[int]] = [[] for _ in range(self.n)]
        for e, (i, _j) in enumerate(self.edges):
            out[i].append(e)
        return tuple(tuple(ids) for ids in out)

    @cached_property
    def col_edges(self) -> tuple[tuple[int, ...], ...]:
        """Edge ids where the vertex is the column vertex (N_c)."""
        out: list[list[int]] = [[] for _ in range(self.n)]
        for e, (_i, j) in enumerate(self.edges):
            out[j].append(e)
        return tuple(tuple(ids) for ids in out)


# -----------------------------------------------------------------------------
# Costs
# -----------------------------------------------------------------------------


def _frozen(values: Any, shape: tuple[int, ...] | None = None) -> FloatArray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if shape is not None and arr.shape != shape:
        raise DimensionMismatch(f"expected shape {shape}, got {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PotentialVector:
    """Cost vector C = -theta.

    Attributes:
        vertex_costs: Array of shape (n, d).
        edge_costs: Array of shape (|E|, d, d); row index is the state of the
            lower-indexed vertex.
    """

    vertex_costs: FloatArray
    edge_costs: FloatArray

    @classmethod
    def from_arrays(cls, vertex_costs: Any, edge_costs: Any) -> PotentialVector:
        """Copy array-likes into a read-only float64 potential."""
        return cls(vertex_costs=_frozen(vertex_costs), edge_costs=_frozen(edge_costs))

    @classmethod
    def zeros(cls, topology: GraphTopology) -> PotentialVector:
        """All-zero costs for a topology."""
        return cls.from_arrays(
            np.zeros((topology.n, topology.d)),
            np.zeros((topology.num_edges, topology.d, topology.d)),
        )

    @property
    def inf_norm(self) -> float:
        """Largest absolute cost entry."""
        parts = [np.abs(self.vertex_costs).max(initial=0.0)]
        parts.append(np.abs(self.edge_costs).max(initial=0.0))
        return float(max(parts))

    def scaled(self, factor: float) -> PotentialVector:
        """Return the costs multiplied by `factor`."""
        return PotentialVector.from_arrays(
            self.vertex_costs * factor, self.edge_costs * factor
        )


# -----------------------------------------------------------------------------
# Validation
# -----------------------------------------------------------------------------


def validate_model(topology: GraphTopology, costs: PotentialVector) -> None:
    """Check that a topology and its costs form a valid pairwise model.

    Args:
        topology: Graph and label count.
        costs: Cost vector.

    Raises:
        DimensionMismatch: Sizes disagree or vertex ids are out of range.
        DuplicateEdge: Repeated edge, self-loop, or non-canonical ordering.
        IsolatedVertex: Some vertex has no incident edge.
        NonFiniteCost: A cost entry is NaN or infinite.
    """
    n, d = topology.n, topology.d
    if n < 2:
        raise DimensionMismatch(f"need at least 2 vertices, got {n}")
    if d < 2:
        raise DimensionMismatch(f"need at least 2 labels, got {d}")

    seen: set[Edge] = set()
    for e, (i, j) in enumerate(topology.edges):
        if not (0 <= i < n and 0 <= j < n):
            raise DimensionMismatch(f"edge {e} = ({i}, {j}) is out of range for n={n}")
        if i == j:
            raise DuplicateEdge(f"edge {e} is a self-loop on vertex {i}")
        if i > j:
            raise DuplicateEdge(f"edge {e} = ({i}, {j}) is not stored with i < j")
        if (i, j) in seen:
            raise DuplicateEdge(f"edge ({i}, {j}) appears more than once")
        seen.add((i, j))

    if len(topology.degree) != n:
        raise DimensionMismatch("degree table does not match the vertex count")
    for v, deg in enumerate(topology.degree):
        if deg == 0:
            raise IsolatedVertex(f"vertex {v} has no incident edge")

    if costs.vertex_costs.shape != (n, d):
        raise DimensionMismatch(
            f"vertex_costs has shape {costs.vertex_costs.shape}, expected {(n, d)}"
        )
    expected_edge = (topology.num_edges, d, d)
    if costs.edge_costs.shape != expected_edge:
        raise DimensionMismatch(
            f"edge_costs has shape {costs.edge_costs.shape}, expected {expected_edge}"
        )
    if not np.all(np.isfinite(costs.vertex_costs)):
        raise NonFiniteCost("vertex_costs contains a non-finite entry")
    if not np.all(np.isfinite(costs.edge_costs)):
        raise NonFiniteCost("edge_costs contains a non-finite entry")


# -----------------------------------------------------------------------------
# Model
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class PairwiseModel:
    """A validated topology together with its costs."""

    topology: GraphTopology
    costs: PotentialVector

    @classmethod
    def create(cls, topology: GraphTopology, costs: PotentialVector) -> PairwiseModel:
        """Validate and bundle a topology with its costs.

        Raises:
            ModelError: When `validate_model` rejects the pair.
        """
        validate_model(topology, costs)
        return cls(topology=topology, costs=costs)

    @property
    def n(self) -> int:
        """Vertex count."""
        return self.topology.n

    @property
    def d(self) -> int:
        """Label count."""
        return self.topology.d

    @classmethod
    def from_json_dict(cls, payload: Mapping[str, Any]) -> PairwiseModel:
        """Decode the model file format.

        Args:
            payload: Mapping with `n`, `d`, `edges`, `vertex_costs`, `edge_costs`.

        Returns:
            A validated `PairwiseModel`.

        Raises:
            ConfigError: A key is missing or has the wrong type.
            ModelError: The decoded model is invalid.
        """
        missing = [
            k
            for k in ("n", "d", "edges", "vertex_costs", "edge_costs")
            if k not in payload
        ]
        if missing:
            raise ConfigError(f"model file is missing keys: {', '.join(missing)}")

        n_any: Any = payload["n"]
        d_any: Any = payload["d"]
        if isinstance(n_any, bool) or not isinstance(n_any, int):
            raise ConfigError("model key 'n' must be an integer")
        if isinstance(d_any, bool) or not isinstance(d_any, int):
            raise ConfigError("model key 'd' must be an integer")

        edges_any: Any = payload["edges"]
        if not isinstance(edges_any, list):
            raise ConfigError("model key 'edges' must be a list of pairs")
        edges: list[tuple[int, int]] = []
        for item in cast(list[Any], edges_any):
            if not isinstance(item, (list, tuple)):
                raise ConfigError(f"edge entry {item!r} is not a pair")
            pair = cast(Sequence[Any], item)
            if len(pair) != 2:
                raise ConfigError(f"edge entry {item!r} is not a pair")
            try:
                edges.append((int(pair[0]), int(pair[1])))
            except (TypeError, ValueError) as err:
                raise ConfigError(f"edge entry {item!r} is not a pair") from err

        topology = GraphTopology.from_edges(n_any, d_any, edges)
        try:
            vertex = _frozen(payload["vertex_costs"])
            edge = _frozen(payload["edge_costs"])
        except (TypeError, ValueError) as err:
            msg = f"cost arrays are ragged or non-numeric: {err}"
            raise DimensionMismatch(msg) from err
        costs = PotentialVector(vertex_costs=vertex, edge_costs=edge)
        return cls.create(topology, costs)

    def to_json_dict(self) -> dict[str, Any]:
        """Encode the model file format."""
        return {
            "n": self.topology.n,
            "d": self.topology.d,
            "edges": [[i, j] for i, j in self.topology.edges],
            "vertex_costs": self.costs.vertex_costs.tolist(),
            "edge_costs": self.costs.edge_costs.tolist(),
        }


# -----------------------------------------------------------------------------
# Marginals
# -----------------------------------------------------------------------------


@dataclass
class MarginalVector:
    """Pseudo-marginals Gamma stored as log-values.

    Mutated in place by the projections of a single solver.

    Attributes:
        topology: Owning topology.
        vertex_log: Array (n, d) of log Gamma_i.
        edge_log: Array (|E|, d, d) of log Gamma_ij.
    """

    topology: GraphTopology
    vertex_log: FloatArray
    edge_log: FloatArray

    @classmethod
    def from_linear(
        cls, topology: GraphTopology, vertex: Any, edge: Any
    ) -> MarginalVector:
        """Build from strictly positive linear-space arrays."""
        v = np.asarray(vertex, dtype=np.float64)
        m = np.asarray(edge, dtype=np.float64)
        if v.shape != (topology.n, topology.d) or m.shape != (
            topology.num_edges,
            topology.d,
            topology.d,
        ):
            raise DimensionMismatch("marginal arrays do not match the topology")
        with np.errstate(divide="ignore"):
            return cls(topology=topology, vertex_log=np.log(v), edge_log=np.log(m))

    @classmethod
    def uniform(cls, topology: GraphTopology) -> MarginalVector:
        """Uniform marginals: 1/d per vertex entry, 1/d^2 per edge entry."""
        d = topology.d
        return cls(
            topology=topology,
            vertex_log=np.full((topology.n, d), -np.log(d)),
            edge_log=np.full((topology.num_edges, d, d), -2.0 * np.log(d)),
        )

    def copy(self) -> MarginalVector:
        """Deep copy of the arrays (topology is shared)."""
        return MarginalVector(
            topology=self.topology,
            vertex_log=self.vertex_log.copy(),
            edge_log=self.edge_log.copy(),
        )

    def vertex_marginals(self) -> FloatArray:
        """Linear-space Gamma_i for every vertex."""
        return np.exp(self.vertex_log)

    def edge_marginals(self) -> FloatArray:
        """Linear-space Gamma_ij for every edge."""
        return np.exp(self.edge_log)

    def is_finite(self) -> bool:
        """True when every log entry is finite (all Gamma entries positive)."""
        return bool(
            np.all(np.isfinite(self.vertex_log)) and np.all(np.isfinite(self.edge_log))
        )


@dataclass(frozen=True)
class SlackVector:
    """Marginalization residuals of every edge.

    Attributes:
        row: Array (|E|, d) of nu_ij = Gamma_ij 1 - Gamma_i.
        col: Array (|E|, d) of nu_ji = Gamma_ij^T 1 - Gamma_j.
    """

    row: FloatArray
    col: FloatArray


@dataclass(frozen=True)
class Assignment:
    """Integral labelling of the vertices."""

    labels: tuple[int, ...]

    @classmethod
    def of(cls, labels: Iterable[int]) -> Assignment:
        """Build from any iterable of integer labels."""
        return cls(labels=tuple(int(x) for x in labels))

    def __len__(self) -> int:
        return len(self.labels)

    def hamming(self, other: Assignment) -> int:
        """Number of vertices on which two assignments differ."""
        if len(other) != len(self):
            raise DimensionMismatch("assignments have different lengths")
        return sum(1 for a, b in zip(self.labels, other.labels) if a != b)


@dataclass(frozen=True)
class Violation:
    """Largest l1 constraint violation and where it occurs."""

    edge: int
    side: Side
    value: float


# -----------------------------------------------------------------------------
# Violations
# -----------------------------------------------------------------------------


def edge_violations(gamma: MarginalVector, edge: int) -> tuple[float, float]:
    """Return the row and column l1 violations of one edge.

    Args:
        gamma: Pseudo-marginals.
        edge: Edge id.

    Returns:
        `(||Gamma_ij 1 - Gamma_i||_1, ||Gamma_ij^T 1 - Gamma_j||_1)`.
    """
    i, j = gamma.topology.edges[edge]
    joint = np.exp(gamma.edge_log[edge])
    row = float(np.abs(joint.sum(axis=1) - np.exp(gamma.vertex_log[i])).sum())
    col = float(np.abs(joint.sum(axis=0) - np.exp(gamma.vertex_log[j])).sum())
    return row, col


def all_violations(gamma: MarginalVector) -> FloatArray:
    """Row and column l1 violations of every edge, shape (|E|, 2)."""
    topo = gamma.topology
    out = np.zeros((topo.num_edges, 2))
    if topo.num_edges == 0:
        return out
    joint = np.exp(gamma.edge_log)
    vertex = np.exp(gamma.vertex_log)
    out[:, 0] = np.abs(joint.sum(axis=2) - vertex[topo.edge_i]).sum(axis=1)
    out[:, 1] = np.abs(joint.sum(axis=1) - vertex[topo.edge_j]).sum(axis=1)
    return out


def max_violation(gamma: MarginalVector) -> Violation:
    """Return the edge and side with the largest l1 violation.

    Ties go to the smallest edge id, then row before column.
    """
    table = all_violations(gamma)
    if table.size == 0:
        return Violation(edge=0, side=Side.ROW, value=0.0)
    # Row-major flattening orders (edge, side) exactly as the tie rule wants.
    flat = int(np.argmax(table))
    edge, side = divmod(flat, 2)
    return Violation(
        edge=edge,
        side=Side.ROW if side == 0 else Side.COL,
        value=float(table.flat[flat]),
    )


def slack_vectors(gamma: MarginalVector) -> SlackVector:
    """Compute the slack vectors nu_ij, nu_ji of every edge."""
    topo = gamma.topology
    joint = np.exp(gamma.edge_log)
    vertex = np.exp(gamma.vertex_log)
    return SlackVector(
        row=joint.sum(axis=2) - vertex[topo.edge_i],
        col=joint.sum(axis=1) - vertex[topo.edge_j],
    )


# -----------------------------------------------------------------------------
# Objectives
# -----------------------------------------------------------------------------


def objective(model: PairwiseModel, assignment: Assignment) -> float:
    """Return sum(theta) of an assignment, that is minus its total cost."""
    topo = model.topology
    if len(assignment) != topo.n:
        raise DimensionMismatch(
            f"assignment has {len(assignment)} labels, model has {topo.n} vertices"
        )
    x = np.asarray(assignment.labels, dtype=np.int64)
    cost = model.costs.vertex_costs[np.arange(topo.n), x].sum()
    if topo.num_edges:
        cost += model.costs.edge_costs[
            np.arange(topo.num_edges), x[topo.edge_i], x[topo.edge_j]
        ].sum()
    return -float(cost)


def integral_marginals(
    model: PairwiseModel, assignment: Assignment
) -> tuple[FloatArray, FloatArray]:
    """Indicator marginal vector of an assignment in linear space."""
    topo = model.topology
    x = np.asarray(assignment.labels, dtype=np.int64)
    vertex = np.zeros((topo.n, topo.d))
    vertex[np.arange(topo.n), x] = 1.0
    edge = np.zeros((topo.num_edges, topo.d, topo.d))
    edge[np.arange(topo.num_edges), x[topo.edge_i], x[topo.edge_j]] = 1.0
    return vertex, edge


def linear_objective(
    model: PairwiseModel, vertex: FloatArray, edge: FloatArray
) -> float:
    """Return <theta, Gamma> for linear-space marginals."""
    return -float(
        np.sum(model.costs.vertex_costs * vertex)
        + np.sum(model.costs.edge_costs * edge)
    )
