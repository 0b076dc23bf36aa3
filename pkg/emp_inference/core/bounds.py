"""Convergence and rounding constants.

Covers the dual-gap bounds `S` and `S0`, the iteration bounds of both EMP
variants, and the eta / epsilon thresholds under which rounding recovers the
MAP assignment.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from enum import StrEnum
from typing import Any

import numpy as np
from scipy.special import logsumexp

from ..const import (
    INTEGRAL_COST_DELTA,
    L2_COST_FLOOR,
    L2_DELTA_CAP,
    LOGGER_NAME,
)
from .errors import NonPositiveDelta, TooLarge, ZeroGap
from .model import PairwiseModel
from .oracle import brute_force_map

_LOGGER = logging.getLogger(LOGGER_NAME)

# -----------------------------------------------------------------------------
# Dual-gap constants
# -----------------------------------------------------------------------------


def compute_S(model: PairwiseModel, eta: float) -> float:
    """Upper bound `S` on the dual optimality gap at initialization.

    `S = sum_edges [lse(-eta C_ij) + (eta / d^2) sum C_ij]
       + sum_vertices [lse(-eta C_i) + (eta / d) sum C_i]`.
    """
    d = model.d
    vertex = model.costs.vertex_costs
    edge = model.costs.edge_costs
    total = float(np.sum(logsumexp(-eta * vertex, axis=1)))
    total += float(eta / d * vertex.sum())
    if model.topology.num_edges:
        total += float(np.sum(logsumexp(-eta * edge, axis=(1, 2))))
        total += float(eta / d**2 * edge.sum())
    return total


def compute_S0(model: PairwiseModel, eta: float) -> float:
    """`S0 = min(||eta C / d + exp(-eta C)||_1, S)`.

    An overflowing exponential makes the first term infinite, so `S` wins.
    """
    d = model.d
    with np.errstate(over="ignore"):
        direct = 0.0
        for block in (model.costs.vertex_costs, model.costs.edge_costs):
            direct += float(np.sum(np.abs(eta * block / d + np.exp(-eta * block))))
    return min(direct, compute_S(model, eta))


def iteration_bounds(S0: float, epsilon: float, max_degree: int) -> tuple[int, int]:
    """Worst-case iteration counts of EMP-cyclic and EMP-greedy.

    Args:
        S0: Dual gap bound, at least 0.
        epsilon: l1 stopping threshold, positive.
        max_degree: Largest vertex degree.

    Returns:
        `(ceil(4 S0 (deg + 1) / eps^2), ceil(4 S0 / eps^2))`.
    """
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if S0 < 0.0:
        raise ValueError(f"S0 must be non-negative, got {S0}")
    scale = 4.0 * S0 / epsilon**2
    return math.ceil(scale * (max_degree + 1)), math.ceil(scale)


# -----------------------------------------------------------------------------
# Rounding thresholds
# -----------------------------------------------------------------------------


def _require_delta(delta: float) -> None:
    if not delta > 0.0:
        raise NonPositiveDelta(f"delta must be positive, got {delta}")


def eta_threshold_general(R1: float, RH: float, delta: float) -> float:
    """Smallest eta for which rounding is guaranteed, given radii and a gap.

    Returns:
        `(2 R1 log(64 R1) + 2 R1 + 2 RH) / delta`.

    Raises:
        NonPositiveDelta: `delta <= 0`.
    """
    _require_delta(delta)
    if R1 <= 0.0:
        raise ValueError(f"R1 must be positive, got {R1}")
    return (2.0 * R1 * math.log(64.0 * R1) + 2.0 * R1 + 2.0 * RH) / delta


def eta_threshold_order_m(n: int, d: int, m: int, delta: float) -> float:
    """Closed-form eta threshold for an order-m relaxation.

    Returns:
        `(log(8 m n^m d^m) + 2 m n^m d^m) / delta`.
    """
    _require_delta(delta)
    if min(n, d, m) < 1:
        raise ValueError("n, d and m must be positive")
    log_term = math.log(8.0 * m) + m * math.log(n * d)
    return (log_term + 2.0 * m * float(n * d) ** m) / delta


def corollary_radii(n: int, d: int, num_edges: int) -> tuple[float, float]:
    """Radii of the pairwise local polytope.

    `R1 = n d + |E| d^2` bounds the total mass of the Gamma blocks and
    `RH = n log d + |E| log d^2` their total entropy.
    """
    r1 = float(n * d + num_edges * d * d)
    rh = n * math.log(d) + num_edges * math.log(d * d)
    return r1, rh


def thresholds_L2(
    n: int,
    d: int,
    num_edges: int,
    max_degree: int,
    delta: float,
    cost_inf_norm: float,
    eta: float,
) -> tuple[float, float]:
    """Eta and epsilon under which EMP output rounds to the MAP assignment.

    Returns:
        `(eta_min, epsilon_max)` with
        `eta_min = (2 log(16 n^2 d^2) + 16 |E| d^2) / min(delta, 1/128)` and
        `epsilon_max = 1 / ((25 d deg |E|)^2 max(eta ||C||_inf, 68))`.
    """
    _require_delta(delta)
    numerator = 2.0 * math.log(16.0 * n * n * d * d) + 16.0 * num_edges * d * d
    eta_min = numerator / min(delta, L2_DELTA_CAP)
    epsilon_max = 1.0 / (
        (25.0 * d * max_degree * num_edges) ** 2
        * max(eta * cost_inf_norm, L2_COST_FLOOR)
    )
    return eta_min, epsilon_max


def delta_integral_gap(model: PairwiseModel) -> float:
    """Gap between the best and second-best integral objective values.

    Only integral vertices are compared, so this is an upper bound on the
    vertex gap of the relaxation.

    Raises:
        TooLarge: Enumeration guard exceeded.
        ZeroGap: The optimum is not unique.
    """
    result = brute_force_map(model)
    if not result.unique:
        raise ZeroGap(
            f"optimum {result.best_value:.6g} is attained by "
            f"{result.count_optimal} assignments"
        )
    return result.best_value - result.second_value


# -----------------------------------------------------------------------------
# Report
# -----------------------------------------------------------------------------


class DeltaSource(StrEnum):
    """Where the gap used by the thresholds came from."""

    USER = "user"
    ORACLE_INTEGRAL_GAP = "oracle_integral_gap"
    INTEGRAL_COST_LOWER_BOUND = "integral_cost_lower_bound"


@dataclass(frozen=True)
class BoundsReport:
    """Every theory constant for one (model, eta, epsilon).

    Attributes:
        S: Dual gap bound.
        S0: `min(||eta C / d + exp(-eta C)||_1, S)`.
        iteration_bound_cyclic: Sweeps EMP-cyclic may need.
        iteration_bound_greedy: Steps EMP-greedy may need.
        eta_threshold_general: Threshold from the radii `R1`, `RH`.
        eta_threshold_order_m: Closed-form threshold for m = 2.
        eta_threshold_L2: Smallest eta of the local-polytope guarantee.
        epsilon_threshold_L2: Largest epsilon of the local-polytope guarantee.
        delta_used: Gap fed to the thresholds.
        delta_source: Provenance of `delta_used`.
        R1: Mass radius (`n d + |E| d^2`).
        RH: Entropy radius (`n log d + |E| log d^2`).
        eta: Regularization used.
        epsilon: Stopping threshold used.
    """

    S: float
    S0: float
    iteration_bound_cyclic: int
    iteration_bound_greedy: int
    eta_threshold_general: float
    eta_threshold_order_m: float
    eta_threshold_L2: float
    epsilon_threshold_L2: float
    delta_used: float
    delta_source: DeltaSource
    R1: float
    RH: float
    eta: float
    epsilon: float

    def to_json_dict(self) -> dict[str, Any]:
        """JSON-ready mapping with the radii formula recorded."""
        out = asdict(self)
        out["delta_source"] = str(self.delta_source)
        out["radii_formula"] = "R1 = n*d + |E|*d^2; RH = n*log(d) + |E|*log(d^2)"
        return out


def _choose_delta(
    model: PairwiseModel, delta: float | None
) -> tuple[float, DeltaSource]:
    if delta is not None:
        _require_delta(delta)
        return delta, DeltaSource.USER
    try:
        return delta_integral_gap(model), DeltaSource.ORACLE_INTEGRAL_GAP
    except (TooLarge, ZeroGap) as err:
        _LOGGER.debug("Falling back to the integral-cost gap bound: %s", err)
        return INTEGRAL_COST_DELTA, DeltaSource.INTEGRAL_COST_LOWER_BOUND


def bounds_report(
    model: PairwiseModel, eta: float, epsilon: float, *, delta: float | None = None
) -> BoundsReport:
    """Assemble every constant for a model.

    Args:
        model: Validated pairwise model.
        eta: Regularization strength.
        epsilon: l1 stopping threshold.
        delta: Vertex gap; when omitted the integral gap is enumerated, and the
            integral-cost bound of one half is used if that is impossible.

    Returns:
        A `BoundsReport`.
    """
    topo = model.topology
    s = compute_S(model, eta)
    s0 = compute_S0(model, eta)
    cyclic, greedy = iteration_bounds(s0, epsilon, topo.max_degree)
    delta_used, source = _choose_delta(model, delta)
    r1, rh = corollary_radii(topo.n, topo.d, topo.num_edges)
    eta_min, eps_max = thresholds_L2(
        topo.n,
        topo.d,
        topo.num_edges,
        topo.max_degree,
        delta_used,
        model.costs.inf_norm,
        eta,
    )
    return BoundsReport(
        S=s,
        S0=s0,
        iteration_bound_cyclic=cyclic,
        iteration_bound_greedy=greedy,
        eta_threshold_general=eta_threshold_general(r1, rh, delta_used),
        eta_threshold_order_m=eta_threshold_order_m(topo.n, topo.d, 2, delta_used),
        eta_threshold_L2=eta_min,
        epsilon_threshold_L2=eps_max,
        delta_used=delta_used,
        delta_source=source,
        R1=r1,
        RH=rh,
        eta=eta,
        epsilon=epsilon,
    )
