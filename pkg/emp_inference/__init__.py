"""Entropy-regularized MAP inference for pairwise models by edge-based message passing.

The numerical domain lives in `emp_inference.core`; this package adds the
stateful solver, the experiment and verification batteries, and the CLI.
"""

from __future__ import annotations

# -----------------------------------------------------------------------------
# Public API
# -----------------------------------------------------------------------------
from .core import (
    Assignment,
    BoundsReport,
    EmpError,
    GraphTopology,
    PairwiseModel,
    PotentialVector,
    PottsConfig,
    bounds_report,
    brute_force_map,
    erdos_renyi,
    grid_graph,
    potts_model,
)
from .experiment import ExperimentSpec, run_experiment
from .solver import (
    EmpSolver,
    SolveResult,
    SolverConfig,
    Variant,
    emp_cyclic,
    emp_greedy,
)
from .verify import VerifyReport, run_verify

__all__ = [
    "Assignment",
    "BoundsReport",
    "EmpError",
    "EmpSolver",
    "ExperimentSpec",
    "GraphTopology",
    "PairwiseModel",
    "PotentialVector",
    "PottsConfig",
    "SolveResult",
    "SolverConfig",
    "Variant",
    "VerifyReport",
    "bounds_report",
    "brute_force_map",
    "emp_cyclic",
    "emp_greedy",
    "erdos_renyi",
    "grid_graph",
    "potts_model",
    "run_experiment",
    "run_verify",
]
