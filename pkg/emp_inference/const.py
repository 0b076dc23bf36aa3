"""Constants for the EMP inference package.

This module centralizes defaults, numerical tolerances, caps and file schemas.
"""

from __future__ import annotations

from typing import Final

PACKAGE: Final = "emp_inference"

# Use a stable logger name so callers can tune verbosity with
# `logging.getLogger("emp_inference").setLevel(...)`.
LOGGER_NAME: Final = PACKAGE

# Optional environment overrides (a `.env` file in the working directory is
# applied without overriding variables that are already set).
ENV_OUT_DIR: Final = "EMP_OUT_DIR"
ENV_WORKERS: Final = "EMP_WORKERS"

DEFAULT_ETA: Final[float] = 50.0
DEFAULT_EPSILON: Final[float] = 1e-3
DEFAULT_OUT_DIR: Final = "emp_out"
DEFAULT_WORKERS: Final[int] = 4

# Experiment protocol: a sweep is one pass over the edges; greedy gets |E|
# single-edge updates per sweep.
DEFAULT_SWEEP_BUDGET: Final[int] = 80
DEFAULT_LABELS: Final[int] = 3
DEFAULT_ALPHA_RANGE: Final[tuple[float, float]] = (-0.5, 0.5)
DEFAULT_BETA_CHOICES: Final[tuple[float, ...]] = (-0.1, 0.1)

# Invariant suite: a seeded battery of small grids.
DEFAULT_VERIFY_ETA: Final[float] = 10.0
DEFAULT_VERIFY_EPSILONS: Final[tuple[float, ...]] = (1e-1, 1e-2)
DEFAULT_VERIFY_SEEDS: Final[int] = 3
DEFAULT_ORACLE_PAIRS: Final[int] = 1000
ROUND_TRIP_STEPS: Final[int] = 10**4
FAULT_SWEEPS: Final[int] = 5

# Hard caps.
MAX_PROJECTION_STEPS: Final[int] = 10**7
ENUMERATION_LIMIT: Final[int] = 10**8
ENUMERATION_CHUNK: Final[int] = 1 << 18

# Tolerances.
NORMALIZATION_TOL: Final[float] = 1e-12
MONOTONICITY_TOL: Final[float] = 1e-12
CONSISTENCY_TOL: Final[float] = 1e-10
CONSISTENCY_GAIN_REL_TOL: Final[float] = 1e-8
# Gains measured from the duals, relative to the dual part of L.
LYAPUNOV_EVAL_REL_TOL: Final[float] = 1e-9
# Incrementally tracked L against a full evaluation.
LYAPUNOV_TRACKING_REL_TOL: Final[float] = 1e-8
GREEDY_PROGRESS_TOL: Final[float] = 1e-9
GAIN_BOUND_TOL: Final[float] = 1e-6
ORACLE_MATCH_TOL: Final[float] = 1e-6
TIE_TOL: Final[float] = 1e-12

# Rounding is trusted as "integral" above this vertex margin.
INTEGRALITY_MARGIN: Final[float] = 0.9

# Golden-section dual oracle.
ORACLE_BRACKET: Final[tuple[float, float]] = (-50.0, 50.0)
ORACLE_XTOL: Final[float] = 1e-10
# Half-width of the second search around the coarse minimizer.
ORACLE_REFINE_WIDTH: Final[float] = 1e-4

# Integral costs give a vertex gap of at least one half.
INTEGRAL_COST_DELTA: Final[float] = 0.5
L2_DELTA_CAP: Final[float] = 1.0 / 128.0
L2_COST_FLOOR: Final[float] = 68.0

# Exit codes (stable contract).
EXIT_OK: Final[int] = 0
EXIT_ERROR: Final[int] = 1
EXIT_NOT_CONVERGED: Final[int] = 2

TRACE_CSV_HEADER: Final[tuple[str, ...]] = (
    "step",
    "iteration",
    "edge_i",
    "edge_j",
    "kind",
    "lyapunov",
    "delta_l",
    "max_violation",
)

EXPERIMENT_CSV_HEADER: Final[tuple[str, ...]] = (
    "family",
    "n",
    "deg_cap",
    "eta",
    "variant",
    "trial",
    "sweep",
    "hamming",
    "max_violation",
    "lyapunov",
)

RESULT_FILE: Final = "result.json"
TRACE_FILE: Final = "trace.csv"
BOUNDS_FILE: Final = "bounds.json"
EXPERIMENT_FILE: Final = "experiment.csv"
SUMMARY_FILE: Final = "summary.json"
VERIFY_FILE: Final = "verify.json"
