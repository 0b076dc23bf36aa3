"""Closed-form Bregman projections onto the per-edge constraints.

Every update is applied twice: to the log-marginals and, additively, to the
dual variables. For edge `(i, j)` rows index `x_i` and columns index `x_j`,
so `i` is a row vertex (`N_r`) and `j` a column vertex (`N_c`).

Each projection returns the change it produced in the Lyapunov function
`L = const - sum(exp-block masses) - sum(xi)`, computed from the touched
blocks only.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ZeroMass
from .model import FloatArray, GraphTopology, MarginalVector, PairwiseModel


@dataclass
class DualState:
    """Dual variables of the entropy-regularized LP.

    `zeta_*` holds the accumulated additive updates, so that
    `log Gamma = -eta * C + zeta` entrywise.

    Attributes:
        lambda_row: Array (|E|, d) of lambda_ij (row-consistency duals).
        lambda_col: Array (|E|, d) of lambda_ji (column-consistency duals).
        xi_edge: Array (|E|,) of edge normalization duals.
        xi_vertex: Array (n,) of vertex normalization duals.
        zeta_vertex: Array (n, d).
        zeta_edge: Array (|E|, d, d).
    """

    lambda_row: FloatArray
    lambda_col: FloatArray
    xi_edge: FloatArray
    xi_vertex: FloatArray
    zeta_vertex: FloatArray
    zeta_edge: FloatArray

    def copy(self) -> DualState:
        """Deep copy of every array."""
        return DualState(
            lambda_row=self.lambda_row.copy(),
            lambda_col=self.lambda_col.copy(),
            xi_edge=self.xi_edge.copy(),
            xi_vertex=self.xi_vertex.copy(),
            zeta_vertex=self.zeta_vertex.copy(),
            zeta_edge=self.zeta_edge.copy(),
        )


ProjectionFn = Callable[[MarginalVector, DualState, int], float]


def new_dual_state(topology: GraphTopology) -> DualState:
    """All-zero dual variables sized for a topology."""
    n, d, m = topology.n, topology.d, topology.num_edges
    return DualState(
        lambda_row=np.zeros((m, d)),
        lambda_col=np.zeros((m, d)),
        xi_edge=np.zeros(m),
        xi_vertex=np.zeros(n),
        zeta_vertex=np.zeros((n, d)),
        zeta_edge=np.zeros((m, d, d)),
    )


# -----------------------------------------------------------------------------
# Scaling primitives
# -----------------------------------------------------------------------------


def scale_rows(
    gamma: MarginalVector, dual: DualState, edge: int, alpha: FloatArray
) -> None:
    """Move `alpha` of log-mass per row state from edge `edge` onto its row vertex.

    `log Gamma_ij(x, .) -= alpha(x)`, `log Gamma_i(x) += alpha(x)` and
    `lambda_ij += alpha`, with `zeta` following the marginals.
    """
    i = gamma.topology.edges[edge][0]
    gamma.edge_log[edge] -= alpha[:, None]
    gamma.vertex_log[i] += alpha
    dual.lambda_row[edge] += alpha
    dual.zeta_edge[edge] -= alpha[:, None]
    dual.zeta_vertex[i] += alpha


def scale_cols(
    gamma: MarginalVector, dual: DualState, edge: int, alpha: FloatArray
) -> None:
    """Column counterpart of `scale_rows` (vertex `j`, `lambda_ji`)."""
    j = gamma.topology.edges[edge][1]
    gamma.edge_log[edge] -= alpha[None, :]
    gamma.vertex_log[j] += alpha
    dual.lambda_col[edge] += alpha
    dual.zeta_edge[edge] -= alpha[None, :]
    dual.zeta_vertex[j] += alpha


def _require_finite(name: str, edge: int, *arrays: FloatArray | float) -> None:
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise ZeroMass(f"{name} on edge {edge}: zero or non-finite mass")


def _consistency_gain(log_sums: FloatArray, log_vertex: FloatArray) -> float:
    # Mass before minus mass after: sum(r) + sum(g) - 2 sum(sqrt(r g)).
    return float(np.sum((np.exp(0.5 * log_sums) - np.exp(0.5 * log_vertex)) ** 2))


def _normalization_gain(log_mass: float) -> float:
    return float(np.expm1(log_mass) - log_mass)


# -----------------------------------------------------------------------------
# Projections
# -----------------------------------------------------------------------------


def project_left_consistency(
    gamma: MarginalVector, dual: DualState, edge: int
) -> float:
    """Project onto `Gamma_ij 1 = Gamma_i`.

    Both sides move to the geometric mean `sqrt(Gamma_i * rowsum)`.

    Args:
        gamma: Log-marginals, updated in place.
        dual: Dual variables, updated in place.
        edge: Edge id.

    Returns:
        The increase of the Lyapunov function.

    Raises:
        ZeroMass: A row sum or vertex entry is zero or not finite.
    """
    i = gamma.topology.edges[edge][0]
    log_rows = np.asarray(logsumexp(gamma.edge_log[edge], axis=1))
    log_vertex = gamma.vertex_log[i].copy()
    _require_finite("left consistency", edge, log_rows, log_vertex)
    alpha = 0.5 * (log_rows - log_vertex)
    gain = _consistency_gain(log_rows, log_vertex)
    scale_rows(gamma, dual, edge, alpha)
    return gain


def project_right_consistency(
    gamma: MarginalVector, dual: DualState, edge: int
) -> float:
    """Project onto `Gamma_ij^T 1 = Gamma_j`; mirror of the left update."""
    j = gamma.topology.edges[edge][1]
    log_cols = np.asarray(logsumexp(gamma.edge_log[edge], axis=0))
    log_vertex = gamma.vertex_log[j].copy()
    _require_finite("right consistency", edge, log_cols, log_vertex)
    alpha = 0.5 * (log_cols - log_vertex)
    gain = _consistency_gain(log_cols, log_vertex)
    scale_cols(gamma, dual, edge, alpha)
    return gain


def _normalize(
    gamma: MarginalVector, dual: DualState, edge: int, vertex: int, name: str
) -> float:
    log_mass_edge = float(logsumexp(gamma.edge_log[edge]))
    log_mass_vertex = float(logsumexp(gamma.vertex_log[vertex]))
    _require_finite(name, edge, log_mass_edge, log_mass_vertex)

    gamma.edge_log[edge] -= log_mass_edge
    gamma.vertex_log[vertex] -= log_mass_vertex
    dual.xi_edge[edge] += log_mass_edge
    dual.xi_vertex[vertex] += log_mass_vertex
    dual.zeta_edge[edge] -= log_mass_edge
    dual.zeta_vertex[vertex] -= log_mass_vertex
    return _normalization_gain(log_mass_edge) + _normalization_gain(log_mass_vertex)


def normalize_left(gamma: MarginalVector, dual: DualState, edge: int) -> float:
    """Rescale `Gamma_ij` and `Gamma_i` to unit mass.

    Returns:
        The increase of the Lyapunov function (never negative).

    Raises:
        ZeroMass: Either block has zero or non-finite mass.
    """
    i = gamma.topology.edges[edge][0]
    return _normalize(gamma, dual, edge, i, "left normalization")


def normalize_right(gamma: MarginalVector, dual: DualState, edge: int) -> float:
    """Rescale `Gamma_ij` and `Gamma_j` to unit mass."""
    j = gamma.topology.edges[edge][1]
    return _normalize(gamma, dual, edge, j, "right normalization")


# -----------------------------------------------------------------------------
# Diagnostics
# -----------------------------------------------------------------------------


def hellinger_sq(p: FloatArray, q: FloatArray) -> float:
    """Squared Hellinger distance `1/2 * sum((sqrt(p) - sqrt(q))**2)`."""
    a = np.sqrt(np.asarray(p, dtype=np.float64))
    b = np.sqrt(np.asarray(q, dtype=np.float64))
    return 0.5 * float(np.sum((a - b) ** 2))


def reconstruct_log_marginals(
    model: PairwiseModel, dual: DualState, eta: float
) -> tuple[FloatArray, FloatArray]:
    """Rebuild `(vertex_log, edge_log)` as `-eta * C + zeta`."""
    return (
        -eta * model.costs.vertex_costs + dual.zeta_vertex,
        -eta * model.costs.edge_costs + dual.zeta_edge,
    )


def dual_exponents(
    model: PairwiseModel, dual: DualState, eta: float
) -> tuple[FloatArray, FloatArray]:
    """Exponents of the Lyapunov function written through lambda and xi.

    Returns:
        `(vertex, edge)` where
        `edge[e] = -eta C_ij - lambda_ij[:, None] - lambda_ji[None, :] - xi_ij` and
        `vertex[i] = -eta C_i - xi_i + sum_{N_r(i)} lambda_ij + sum_{N_c(i)} lambda_ji`.
    """
    topo = model.topology
    edge = (
        -eta * model.costs.edge_costs
        - dual.lambda_row[:, :, None]
        - dual.lambda_col[:, None, :]
        - dual.xi_edge[:, None, None]
    )
    incoming = np.zeros((topo.n, topo.d))
    np.add.at(incoming, topo.edge_i, dual.lambda_row)
    np.add.at(incoming, topo.edge_j, dual.lambda_col)
    vertex = -eta * model.costs.vertex_costs - dual.xi_vertex[:, None] + incoming
    return vertex, edge


def decomposition_residual(
    model: PairwiseModel, dual: DualState, eta: float, gamma: MarginalVector
) -> float:
    """Largest disagreement between stored log-marginals and both dual forms.

    Compares `log Gamma` against `-eta C + zeta` and against the lambda/xi
    exponents; the result is a max-norm over every entry.
    """
    worst = 0.0
    for vertex, edge in (
        reconstruct_log_marginals(model, dual, eta),
        dual_exponents(model, dual, eta),
    ):
        worst = max(
            worst,
            float(np.max(np.abs(gamma.vertex_log - vertex), initial=0.0)),
            float(np.max(np.abs(gamma.edge_log - edge), initial=0.0)),
        )
    return worst


def local_lyapunov(
    model: PairwiseModel, dual: DualState, eta: float, edge: int, vertex: int
) -> float:
    """Dual-dependent Lyapunov terms of one edge block and one vertex block.

    Evaluated from lambda and xi alone, never from the stored marginals. A
    projection on `edge` that touches `vertex` changes no other term of `L`,
    so the difference of two evaluations around it is its exact gain.
    """
    topo = model.topology
    edge_exp = (
        -eta * model.costs.edge_costs[edge]
        - dual.lambda_row[edge][:, None]
        - dual.lambda_col[edge][None, :]
        - dual.xi_edge[edge]
    )
    rows = np.asarray(topo.row_edges[vertex], dtype=np.intp)
    cols = np.asarray(topo.col_edges[vertex], dtype=np.intp)
    vertex_exp = (
        -eta * model.costs.vertex_costs[vertex]
        - dual.xi_vertex[vertex]
        + dual.lambda_row[rows].sum(axis=0)
        + dual.lambda_col[cols].sum(axis=0)
    )
    mass = float(np.exp(edge_exp).sum() + np.exp(vertex_exp).sum())
    return -mass - float(dual.xi_edge[edge]) - float(dual.xi_vertex[vertex])
