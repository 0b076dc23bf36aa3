"""Pure numerical domain of the EMP inference package.

The package provides:
    - Pairwise model types, validation and constraint-violation measurement
    - The four closed-form Bregman projections and their dual bookkeeping
    - Theory constants (dual gaps, iteration bounds, eta thresholds)
    - Brute-force MAP and numerical KL-projection oracles
    - Seeded grid / random-graph / Potts instance generators
"""

from __future__ import annotations

# -----------------------------------------------------------------------------
# Public API
# -----------------------------------------------------------------------------
from .bounds import (
    BoundsReport,
    DeltaSource,
    bounds_report,
    compute_S,
    compute_S0,
    corollary_radii,
    delta_integral_gap,
    eta_threshold_general,
    eta_threshold_order_m,
    iteration_bounds,
    thresholds_L2,
)
from .errors import (
    ConfigError,
    DimensionMismatch,
    DuplicateEdge,
    EmpError,
    IsolatedVertex,
    ModelError,
    NonFiniteCost,
    NonPositiveDelta,
    NonPositiveInput,
    TheoryViolation,
    TooLarge,
    Unrepairable,
    ZeroGap,
    ZeroMass,
)
from .generators import (
    PottsConfig,
    erdos_renyi,
    erdos_renyi_probability,
    grid_graph,
    potts_costs,
    potts_model,
)
from .model import (
    Assignment,
    GraphTopology,
    MarginalVector,
    PairwiseModel,
    PotentialVector,
    Side,
    SlackVector,
    Violation,
    all_violations,
    edge_violations,
    integral_marginals,
    linear_objective,
    max_violation,
    objective,
    slack_vectors,
    validate_model,
)
from .oracle import OracleResult, brute_force_map, kl_projection_oracle
from .projections import (
    DualState,
    ProjectionFn,
    decomposition_residual,
    dual_exponents,
    hellinger_sq,
    local_lyapunov,
    new_dual_state,
    normalize_left,
    normalize_right,
    project_left_consistency,
    project_right_consistency,
    reconstruct_log_marginals,
    scale_cols,
    scale_rows,
)

__all__ = [
    "Assignment",
    "BoundsReport",
    "ConfigError",
    "DeltaSource",
    "DimensionMismatch",
    "DualState",
    "DuplicateEdge",
    "EmpError",
    "GraphTopology",
    "IsolatedVertex",
    "MarginalVector",
    "ModelError",
    "NonFiniteCost",
    "NonPositiveDelta",
    "NonPositiveInput",
    "OracleResult",
    "PairwiseModel",
    "PotentialVector",
    "PottsConfig",
    "ProjectionFn",
    "Side",
    "SlackVector",
    "TheoryViolation",
    "TooLarge",
    "Unrepairable",
    "Violation",
    "ZeroGap",
    "ZeroMass",
    "all_violations",
    "bounds_report",
    "brute_force_map",
    "compute_S",
    "compute_S0",
    "corollary_radii",
    "decomposition_residual",
    "delta_integral_gap",
    "dual_exponents",
    "edge_violations",
    "erdos_renyi",
    "erdos_renyi_probability",
    "eta_threshold_general",
    "eta_threshold_order_m",
    "grid_graph",
    "hellinger_sq",
    "integral_marginals",
    "iteration_bounds",
    "kl_projection_oracle",
    "linear_objective",
    "local_lyapunov",
    "max_violation",
    "new_dual_state",
    "normalize_left",
    "normalize_right",
    "objective",
    "potts_costs",
    "potts_model",
    "project_left_consistency",
    "project_right_consistency",
    "reconstruct_log_marginals",
    "scale_cols",
    "scale_rows",
    "slack_vectors",
    "thresholds_L2",
    "validate_model",
]
