"""Independent ground truth: exhaustive MAP search and a numerical KL projection."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from ..const import (
    ENUMERATION_CHUNK,
    ENUMERATION_LIMIT,
    LOGGER_NAME,
    ORACLE_BRACKET,
    ORACLE_REFINE_WIDTH,
    ORACLE_XTOL,
    TIE_TOL,
)
from .errors import NonPositiveInput, TooLarge
from .model import Assignment, FloatArray, PairwiseModel, Side

_LOGGER = logging.getLogger(LOGGER_NAME)


@dataclass(frozen=True)
class OracleResult:
    """Outcome of exhaustive MAP search.

    Attributes:
        best: First optimal assignment in mixed-radix order (vertex 0 most
            significant).
        best_value: Largest objective `sum(theta)`.
        second_value: Second entry of the sorted objective values; equals
            `best_value` when the optimum is attained more than once.
        unique: True when exactly one assignment attains `best_value`.
        count_optimal: Number of assignments within tolerance of the optimum.
    """

    best: Assignment
    best_value: float
    second_value: float
    unique: bool
    count_optimal: int


def enumeration_size(model: PairwiseModel) -> int:
    """Number of assignments, d**n."""
    return int(model.d) ** int(model.n)


def brute_force_map(
    model: PairwiseModel,
    *,
    limit: int = ENUMERATION_LIMIT,
    chunk: int = ENUMERATION_CHUNK,
) -> OracleResult:
    """Find the exact MAP assignment by enumerating every labelling.

    Objectives are evaluated in vectorized chunks of assignments.

    Args:
        model: Validated pairwise model.
        limit: Largest number of assignments allowed.
        chunk: Assignments evaluated per batch.

    Returns:
        An `OracleResult`.

    Raises:
        TooLarge: `d**n` exceeds `limit`.
    """
    topo = model.topology
    n, d = topo.n, topo.d
    total = enumeration_size(model)
    if total > limit:
        raise TooLarge(f"{d}^{n} = {total} assignments exceeds the limit of {limit}")

    vertex_costs = model.costs.vertex_costs
    edge_costs = model.costs.edge_costs
    vertex_ids = np.arange(n)
    edge_ids = np.arange(topo.num_edges)
    shape = (d,) * n

    best_value = -np.inf
    best_index = -1
    count = 0
    runner = -np.inf

    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total), dtype=np.int64)
        labels = np.stack(np.unravel_index(flat, shape), axis=1)
        cost = vertex_costs[vertex_ids, labels].sum(axis=1)
        if topo.num_edges:
            cost += edge_costs[
                edge_ids, labels[:, topo.edge_i], labels[:, topo.edge_j]
            ].sum(axis=1)
        values = -cost

        top = int(np.argmax(values))
        chunk_best = float(values[top])
        if best_index < 0:
            best_value, best_index = chunk_best, start + top
        elif chunk_best > best_value + TIE_TOL * max(1.0, abs(best_value)):
            runner = max(runner, best_value)
            best_value = chunk_best
            best_index = start + top
            count = 0
        tol = TIE_TOL * max(1.0, abs(best_value))
        near = values >= best_value - tol
        count += int(np.count_nonzero(near))
        if not np.all(near):
            runner = max(runner, float(values[~near].max()))

    best = Assignment.of(int(x) for x in np.unravel_index(best_index, shape))
    second = best_value if count > 1 else runner
    _LOGGER.debug(
        "Enumerated %d assignments: best=%.6g count_optimal=%d",
        total,
        best_value,
        count,
    )
    return OracleResult(
        best=best,
        best_value=float(best_value),
        second_value=float(second),
        unique=count == 1,
        count_optimal=count,
    )


# -----------------------------------------------------------------------------
# KL projection by 1-D dual search
# -----------------------------------------------------------------------------


def _dual_minimizer(block_mass: float, vertex_mass: float) -> float:
    """Minimize `block_mass * exp(-a) + vertex_mass * exp(a)` over `a`."""

    def dual(a: float) -> float:
        return float(block_mass * np.exp(-a) + vertex_mass * np.exp(a))

    coarse = minimize_scalar(
        dual, bounds=ORACLE_BRACKET, method="bounded", options={"xatol": ORACLE_XTOL}
    )
    a0 = float(coarse.x)
    low, high = ORACLE_BRACKET
    if not low + ORACLE_REFINE_WIDTH < a0 < high - ORACLE_REFINE_WIDTH:
        raise NonPositiveInput(
            f"dual minimizer {a0:.3g} hit the search bracket {ORACLE_BRACKET}"
        )

    # Second pass on the shifted dual: expm1 keeps the flat bottom resolvable.
    b0 = block_mass * np.exp(-a0)
    v0 = vertex_mass * np.exp(a0)

    def shifted(t: float) -> float:
        return float(b0 * np.expm1(-t) + v0 * np.expm1(t))

    fine = minimize_scalar(
        shifted,
        bounds=(-ORACLE_REFINE_WIDTH, ORACLE_REFINE_WIDTH),
        method="bounded",
        options={"xatol": ORACLE_XTOL},
    )
    return a0 + float(fine.x)


def kl_projection_oracle(
    gamma_edge: FloatArray, gamma_vertex: FloatArray, side: Side
) -> tuple[FloatArray, FloatArray]:
    """KL-project an (edge, vertex) pair onto one consistency constraint.

    Solves the one-dimensional convex dual of every coordinate with a bounded
    golden-section/Brent search instead of the closed form.

    Args:
        gamma_edge: Strictly positive d x d joint.
        gamma_vertex: Strictly positive d-vector (`Gamma_i` for `Side.ROW`,
            `Gamma_j` for `Side.COL`).
        side: Which marginal of the joint must match `gamma_vertex`.

    Returns:
        The projected `(joint, vertex)` pair in linear space.

    Raises:
        NonPositiveInput: An input entry is not strictly positive and finite.
    """
    joint = np.asarray(gamma_edge, dtype=np.float64)
    vertex = np.asarray(gamma_vertex, dtype=np.float64)
    for name, arr in (("gamma_edge", joint), ("gamma_vertex", vertex)):
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise NonPositiveInput(f"{name} must be strictly positive and finite")

    sums = joint.sum(axis=1) if side is Side.ROW else joint.sum(axis=0)
    alpha = np.array(
        [_dual_minimizer(float(s), float(v)) for s, v in zip(sums, vertex)]
    )
    if side is Side.ROW:
        projected = joint * np.exp(-alpha)[:, None]
    else:
        projected = joint * np.exp(-alpha)[None, :]
    return projected, vertex * np.exp(alpha)
