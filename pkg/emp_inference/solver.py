"""EMP-cyclic and EMP-greedy solvers.

`EmpSolver` owns one model's marginals and duals for a single run. It applies
the per-edge projections, tracks the Lyapunov function incrementally from the
gain each projection reports, and stops once every l1 constraint violation is
below epsilon (checked before each sweep, or before each greedy step).

With `assert_theory` or a trace, every step's gain is also evaluated from the
duals alone (`local_lyapunov`), so the reported gains are checked rather than
trusted.

A run that hits its iteration cap returns the state after the last sweep with
`converged=False`; that is a result, not an error.
"""

from __future__ import annotations

import dataclasses
import heapq
import logging
import time
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any

import numpy as np
from scipy.special import logsumexp

from .const import (
    CONSISTENCY_GAIN_REL_TOL,
    DEFAULT_EPSILON,
    DEFAULT_ETA,
    GREEDY_PROGRESS_TOL,
    LOGGER_NAME,
    LYAPUNOV_EVAL_REL_TOL,
    LYAPUNOV_TRACKING_REL_TOL,
    MAX_PROJECTION_STEPS,
    MONOTONICITY_TOL,
    NORMALIZATION_TOL,
    TRACE_CSV_HEADER,
)
from .core import (
    Assignment,
    ConfigError,
    DualState,
    MarginalVector,
    PairwiseModel,
    ProjectionFn,
    Side,
    TheoryViolation,
    Violation,
    all_violations,
    compute_S0,
    decomposition_residual,
    dual_exponents,
    edge_violations,
    hellinger_sq,
    iteration_bounds,
    local_lyapunov,
    normalize_left,
    normalize_right,
    project_left_consistency,
    project_right_consistency,
)
from .core.model import FloatArray

_LOGGER = logging.getLogger(LOGGER_NAME)

# -----------------------------------------------------------------------------
# Configuration
# -----------------------------------------------------------------------------


class Variant(StrEnum):
    """Edge selection rule."""

    CYCLIC = "cyclic"
    GREEDY = "greedy"


class ProjectionKind(StrEnum):
    """Kind of a trace record."""

    LEFT_CONS = "left_cons"
    LEFT_NORM = "left_norm"
    RIGHT_CONS = "right_cons"
    RIGHT_NORM = "right_norm"
    SWEEP_END = "sweep_end"

    @property
    def is_consistency(self) -> bool:
        """True for the two marginalization projections."""
        return self in (ProjectionKind.LEFT_CONS, ProjectionKind.RIGHT_CONS)

    @property
    def side(self) -> Side:
        """Constraint side the projection acts on."""
        if self in (ProjectionKind.LEFT_CONS, ProjectionKind.LEFT_NORM):
            return Side.ROW
        return Side.COL


DEFAULT_PROJECTIONS: Mapping[ProjectionKind, ProjectionFn] = {
    ProjectionKind.LEFT_CONS: project_left_consistency,
    ProjectionKind.LEFT_NORM: normalize_left,
    ProjectionKind.RIGHT_CONS: project_right_consistency,
    ProjectionKind.RIGHT_NORM: normalize_right,
}

_CYCLE = (
    ProjectionKind.LEFT_CONS,
    ProjectionKind.LEFT_NORM,
    ProjectionKind.RIGHT_CONS,
    ProjectionKind.RIGHT_NORM,
)
_GREEDY_PAIRS = {
    Side.ROW: (ProjectionKind.LEFT_CONS, ProjectionKind.LEFT_NORM),
    Side.COL: (ProjectionKind.RIGHT_CONS, ProjectionKind.RIGHT_NORM),
}


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of one solver run.

    Attributes:
        eta: Regularization strength, positive.
        epsilon: l1 stopping threshold, positive.
        max_iterations: Cap on sweeps (cyclic) or greedy steps; `None` uses
            `default_max_iterations`.
        variant: Cyclic or greedy edge selection.
        record_trace: Keep one record per projection step.
        assert_theory: Check the per-step improvement guarantees at runtime
            and raise `TheoryViolation` on failure.
    """

    eta: float = DEFAULT_ETA
    epsilon: float = DEFAULT_EPSILON
    max_iterations: int | None = None
    variant: Variant = Variant.CYCLIC
    record_trace: bool = False
    assert_theory: bool = False

    def __post_init__(self) -> None:
        if not (np.isfinite(self.eta) and self.eta > 0.0):
            raise ConfigError(f"eta must be positive and finite, got {self.eta}")
        if not (np.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise ConfigError(f"epsilon must be positive and finite: {self.epsilon}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be >= 1: {self.max_iterations}")
        try:
            object.__setattr__(self, "variant", Variant(self.variant))
        except ValueError as err:
            raise ConfigError(f"unknown variant {self.variant!r}") from err


def default_max_iterations(model: PairwiseModel, config: SolverConfig) -> int:
    """Iteration bound of the variant, capped by the projection-step budget.

    A cyclic sweep costs `4 |E|` projections and a greedy step costs 2.
    """
    topo = model.topology
    s0 = compute_S0(model, config.eta)
    cyclic, greedy = iteration_bounds(s0, config.epsilon, topo.max_degree)
    if config.variant is Variant.CYCLIC:
        bound, cap = cyclic, MAX_PROJECTION_STEPS // (4 * topo.num_edges)
    else:
        bound, cap = greedy, MAX_PROJECTION_STEPS // 2
    return max(1, min(bound, cap))


# -----------------------------------------------------------------------------
# Results
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class StepRecord:
    """One projection step (or sweep boundary) of a run.

    Attributes:
        step: Projection steps applied so far, this one included.
        iteration: Sweep (cyclic) or greedy step this record belongs to.
        edge: Edge id, -1 on sweep boundaries.
        edge_i: Row vertex, -1 on sweep boundaries.
        edge_j: Column vertex, -1 on sweep boundaries.
        kind: Projection applied.
        lyapunov: Tracked Lyapunov value after the step.
        lyapunov_dual: Dual-dependent part of `lyapunov` (constant dropped).
        delta_l: Lyapunov change of the step, evaluated from the duals.
        reported_gain: Gain the projection itself returned; the tracked value
            advances by this.
        max_violation: Largest l1 violation after the step.
        expected_gain: `2 h^2` of the repaired violation for consistency
            steps, NaN otherwise.
        elapsed: Seconds since the solver was created.
    """

    step: int
    iteration: int
    edge: int
    edge_i: int
    edge_j: int
    kind: ProjectionKind
    lyapunov: float
    lyapunov_dual: float
    delta_l: float
    reported_gain: float
    max_violation: float
    expected_gain: float
    elapsed: float


@dataclass
class SolveTrace:
    """Step records of one run plus its terminal status."""

    steps: list[StepRecord] = field(default_factory=lambda: [])
    status: str = "running"

    def projection_records(self) -> list[StepRecord]:
        """Records of actual projections (sweep boundaries dropped)."""
        return [r for r in self.steps if r.kind is not ProjectionKind.SWEEP_END]

    def to_csv_rows(self) -> list[list[str]]:
        """Rows matching `TRACE_CSV_HEADER`."""
        rows: list[list[str]] = []
        for r in self.steps:
            boundary = r.kind is ProjectionKind.SWEEP_END
            rows.append(
                [
                    str(r.step),
                    str(r.iteration),
                    "" if boundary else str(r.edge_i),
                    "" if boundary else str(r.edge_j),
                    str(r.kind),
                    repr(r.lyapunov),
                    repr(r.delta_l),
                    repr(r.max_violation),
                ]
            )
        return rows

    @staticmethod
    def csv_header() -> list[str]:
        """Trace CSV header."""
        return list(TRACE_CSV_HEADER)


@dataclass
class SolveResult:
    """Outcome of a run.

    Attributes:
        rounded: Per-vertex argmax of the final marginals.
        final_marginals: Log-marginals at termination.
        final_dual: Dual variables at termination.
        iterations_used: Sweeps (cyclic) or greedy steps executed.
        projection_steps: Individual projections executed.
        converged: Every violation was below epsilon at termination.
        integrality_margin: Smallest over vertices of the largest Gamma_i entry.
        max_violation: Largest l1 violation at termination.
        lyapunov_gain: `L(final) - L(init)`, evaluated from the final duals.
        variant: Variant that produced the result.
        trace: Step records when requested.
    """

    rounded: Assignment
    final_marginals: MarginalVector
    final_dual: DualState
    iterations_used: int
    projection_steps: int
    converged: bool
    integrality_margin: float
    max_violation: float
    lyapunov_gain: float
    variant: Variant
    trace: SolveTrace | None = None

    def to_json_dict(self) -> dict[str, Any]:
        """Result file payload."""
        return {
            "assignment": list(self.rounded.labels),
            "converged": self.converged,
            "iterations": self.iterations_used,
            "integrality_margin": self.integrality_margin,
            "variant": str(self.variant),
            "projection_steps": self.projection_steps,
            "max_violation": self.max_violation,
        }


@dataclass(frozen=True)
class SweepSnapshot:
    """State handed to `on_sweep` after every sweep.

    `gamma` and `dual` are the solver's live state; read them, do not keep or
    mutate them. `lyapunov` and `lyapunov_dual` are the tracked values.
    """

    sweep: int
    projection_steps: int
    gamma: MarginalVector
    dual: DualState
    max_violation: float
    lyapunov: float
    lyapunov_dual: float


SweepCallback = Callable[[SweepSnapshot], None]

# -----------------------------------------------------------------------------
# Free functions
# -----------------------------------------------------------------------------


def initialize(model: PairwiseModel, eta: float) -> tuple[MarginalVector, DualState]:
    """Normalized `exp(-eta C)` and the duals that produce it.

    `lambda = 0`, `xi` holds the log-normalizers and `zeta = -xi`.
    """
    topo = model.topology
    vertex_log = -eta * model.costs.vertex_costs
    edge_log = -eta * model.costs.edge_costs
    vertex_norm = np.asarray(logsumexp(vertex_log, axis=1))
    edge_norm = np.asarray(logsumexp(edge_log, axis=(1, 2)))
    vertex_log = vertex_log - vertex_norm[:, None]
    edge_log = edge_log - edge_norm[:, None, None]

    d, m = topo.d, topo.num_edges
    dual = DualState(
        lambda_row=np.zeros((m, d)),
        lambda_col=np.zeros((m, d)),
        xi_edge=edge_norm.copy(),
        xi_vertex=vertex_norm.copy(),
        zeta_vertex=np.broadcast_to(-vertex_norm[:, None], (topo.n, d)).copy(),
        zeta_edge=np.broadcast_to(-edge_norm[:, None, None], (m, d, d)).copy(),
    )
    gamma = MarginalVector(topology=topo, vertex_log=vertex_log, edge_log=edge_log)
    return gamma, dual


def lyapunov_parts(
    dual: DualState, model: PairwiseModel, eta: float
) -> tuple[float, float]:
    """Split the Lyapunov function into its constant and dual-dependent parts.

    Returns:
        `(sum exp(-eta C), -sum exp(exponents) - sum xi)`.
    """
    with np.errstate(over="ignore"):
        constant = float(
            np.exp(
                np.logaddexp(
                    logsumexp(-eta * model.costs.vertex_costs),
                    logsumexp(-eta * model.costs.edge_costs),
                )
            )
        )
    vertex, edge = dual_exponents(model, dual, eta)
    mass = float(np.exp(vertex).sum() + np.exp(edge).sum())
    variable = -mass - float(dual.xi_edge.sum()) - float(dual.xi_vertex.sum())
    return constant, variable


def lyapunov(dual: DualState, model: PairwiseModel, eta: float) -> float:
    """Lyapunov function `L(lambda, xi)`, constant terms included."""
    constant, variable = lyapunov_parts(dual, model, eta)
    return constant + variable


def round_marginals(gamma: MarginalVector) -> Assignment:
    """Per-vertex argmax of Gamma_i, ties to the smallest label."""
    return Assignment.of(np.argmax(gamma.vertex_log, axis=1).tolist())


def integrality_margin(gamma: MarginalVector) -> float:
    """Smallest over vertices of the largest Gamma_i entry."""
    return float(np.exp(gamma.vertex_log.max(axis=1)).min())


@dataclass(frozen=True)
class FixedPointReport:
    """Result of re-projecting a state.

    Attributes:
        max_change: Largest linear-space entry change over every projection.
        worst_edge: Edge where it occurred.
        worst_kind: Projection that produced it.
        decomposition_residual: Dual-primal mismatch of the input state.
        is_fixed: `max_change <= tol`.
    """

    max_change: float
    worst_edge: int
    worst_kind: ProjectionKind
    decomposition_residual: float
    is_fixed: bool


def fixed_point_check(
    gamma: MarginalVector,
    dual: DualState,
    model: PairwiseModel,
    eta: float,
    tol: float,
) -> FixedPointReport:
    """Apply every projection to a copy of the state and measure the change.

    Each (edge, projection) pair starts from the unmodified input state.
    """
    worst = 0.0
    worst_edge = 0
    worst_kind = ProjectionKind.LEFT_CONS
    base_vertex = gamma.vertex_marginals()
    base_edge = gamma.edge_marginals()
    for edge, (i, j) in enumerate(model.topology.edges):
        for kind in _CYCLE:
            g, dl = gamma.copy(), dual.copy()
            DEFAULT_PROJECTIONS[kind](g, dl, edge)
            v = i if kind.side is Side.ROW else j
            change = max(
                float(np.abs(np.exp(g.edge_log[edge]) - base_edge[edge]).max()),
                float(np.abs(np.exp(g.vertex_log[v]) - base_vertex[v]).max()),
            )
            if change > worst:
                worst, worst_edge, worst_kind = change, edge, kind
    return FixedPointReport(
        max_change=worst,
        worst_edge=worst_edge,
        worst_kind=worst_kind,
        decomposition_residual=decomposition_residual(model, dual, eta, gamma),
        is_fixed=worst <= tol,
    )


# -----------------------------------------------------------------------------
# Solver
# -----------------------------------------------------------------------------


class _ViolationTable:
    """Row/column violations of every edge, refreshed around touched vertices."""

    def __init__(self, gamma: MarginalVector) -> None:
        self._gamma = gamma
        self.values: FloatArray = all_violations(gamma)

    def refresh_vertex(self, vertex: int) -> tuple[int, ...]:
        """Recompute every edge incident on `vertex`; return their ids."""
        edges = self._gamma.topology.incident[vertex]
        for e in edges:
            self.values[e] = edge_violations(self._gamma, e)
        return edges

    def max(self) -> Violation:
        flat = int(np.argmax(self.values))
        edge, side = divmod(flat, 2)
        return Violation(
            edge=edge,
            side=Side.ROW if side == 0 else Side.COL,
            value=float(self.values.flat[flat]),
        )


class EmpSolver:
    """Single-use driver for one EMP run on one model."""

    def __init__(
        self,
        model: PairwiseModel,
        config: SolverConfig,
        *,
        on_sweep: SweepCallback | None = None,
        projections: Mapping[ProjectionKind, ProjectionFn] | None = None,
    ) -> None:
        self.model = model
        self.config = config
        self.max_iterations = config.max_iterations or default_max_iterations(
            model, config
        )
        self._on_sweep = on_sweep
        self._projections = dict(DEFAULT_PROJECTIONS)
        if projections:
            self._projections.update(projections)

        self.gamma, self.dual = initialize(model, config.eta)
        self._constant, self._variable = lyapunov_parts(self.dual, model, config.eta)
        self._initial_variable = self._variable
        self._steps = 0
        self._sweeps = 0
        self._trace = SolveTrace() if config.record_trace else None
        self._violations: _ViolationTable | None = None
        self._started = time.perf_counter()
        self._done = False

    @property
    def lyapunov_value(self) -> float:
        """Current Lyapunov value, constant terms included."""
        return self._constant + self._variable

    @property
    def lyapunov_gain(self) -> float:
        """`L(now) - L(init)`."""
        return self._variable - self._initial_variable

    @property
    def projection_steps(self) -> int:
        """Projections applied so far."""
        return self._steps

    def run(self) -> SolveResult:
        """Run the configured variant to convergence or to the iteration cap.

        Raises:
            ZeroMass: A projection met an empty block.
            TheoryViolation: `assert_theory` is set and a guarantee failed.
        """
        if self._done:
            raise RuntimeError("EmpSolver instances are single-use")
        self._done = True
        if self.config.variant is Variant.GREEDY:
            converged, iterations = self._run_greedy()
        else:
            converged, iterations = self._run_cyclic()
        return self._result(converged, iterations)

    # -- variants -------------------------------------------------------------

    def _run_cyclic(self) -> tuple[bool, int]:
        num_edges = self.model.topology.num_edges
        if self.config.record_trace:
            self._violations = _ViolationTable(self.gamma)
        while True:
            worst = float(all_violations(self.gamma).max())
            if worst < self.config.epsilon:
                return True, self._sweeps
            if self._sweeps >= self.max_iterations:
                return False, self._sweeps
            self._sweeps += 1
            for edge in range(num_edges):
                for kind in _CYCLE:
                    self._apply(kind, edge, self._sweeps)
            self._end_sweep()

    def _run_greedy(self) -> tuple[bool, int]:
        table = _ViolationTable(self.gamma)
        self._violations = table
        num_edges = self.model.topology.num_edges
        version = np.zeros((num_edges, 2), dtype=np.int64)
        heap: list[tuple[float, int, int, int]] = [
            (-float(table.values[e, s]), e, s, 0)
            for e in range(num_edges)
            for s in (0, 1)
        ]
        heapq.heapify(heap)

        steps = 0
        while True:
            while heap[0][3] != version[heap[0][1], heap[0][2]]:
                heapq.heappop(heap)
            value, edge, side_index, _ = heap[0]
            if -value < self.config.epsilon:
                converged = True
                break
            if steps >= self.max_iterations:
                converged = False
                break

            steps += 1
            side = Side.ROW if side_index == 0 else Side.COL
            gained = sum(self._apply(kind, edge, steps) for kind in _GREEDY_PAIRS[side])
            if self.config.assert_theory:
                self._check_greedy_progress(gained, -value)

            i, j = self.model.topology.edges[edge]
            for e in self.model.topology.incident[i if side is Side.ROW else j]:
                for s in (0, 1):
                    version[e, s] += 1
                    heapq.heappush(
                        heap, (-float(table.values[e, s]), e, s, int(version[e, s]))
                    )
            if steps % num_edges == 0:
                self._sweeps += 1
                self._end_sweep()

        if steps % num_edges:
            self._sweeps += 1
            self._end_sweep()
        return converged, steps

    # -- steps ----------------------------------------------------------------

    def _expected_gain(self, kind: ProjectionKind, edge: int) -> float:
        i, j = self.model.topology.edges[edge]
        joint = np.exp(self.gamma.edge_log[edge])
        if kind.side is Side.ROW:
            sums, vertex = joint.sum(axis=1), np.exp(self.gamma.vertex_log[i])
        else:
            sums, vertex = joint.sum(axis=0), np.exp(self.gamma.vertex_log[j])
        return 2.0 * hellinger_sq(sums, vertex)

    def _apply(self, kind: ProjectionKind, edge: int, iteration: int) -> float:
        """Apply one projection; return its gain, measured when checks are on."""
        config = self.config
        i, j = self.model.topology.edges[edge]
        v = i if kind.side is Side.ROW else j
        measure = config.assert_theory or config.record_trace
        expected = float("nan")
        local_before = 0.0
        if measure:
            if kind.is_consistency:
                expected = self._expected_gain(kind, edge)
            local_before = local_lyapunov(self.model, self.dual, config.eta, edge, v)
        before = self._variable

        gain = self._projections[kind](self.gamma, self.dual, edge)
        self._steps += 1
        self._variable += gain

        measured = gain
        if measure:
            local_after = local_lyapunov(self.model, self.dual, config.eta, edge, v)
            measured = local_after - local_before
        if config.assert_theory:
            self._check_step(kind, edge, gain, measured, expected, before)

        if self._violations is not None:
            self._violations.refresh_vertex(v)
        if self._trace is not None:
            assert self._violations is not None
            self._trace.steps.append(
                StepRecord(
                    step=self._steps,
                    iteration=iteration,
                    edge=edge,
                    edge_i=i,
                    edge_j=j,
                    kind=kind,
                    lyapunov=self.lyapunov_value,
                    lyapunov_dual=self._variable,
                    delta_l=measured,
                    reported_gain=gain,
                    max_violation=self._violations.max().value,
                    expected_gain=expected,
                    elapsed=time.perf_counter() - self._started,
                )
            )
        return measured

    def _check_step(
        self,
        kind: ProjectionKind,
        edge: int,
        gain: float,
        measured: float,
        expected: float,
        before: float,
    ) -> None:
        scale = max(1.0, abs(before))
        eval_tol = LYAPUNOV_EVAL_REL_TOL * scale
        if not (np.isfinite(gain) and np.isfinite(measured)):
            raise TheoryViolation(f"{kind} on edge {edge} produced a non-finite gain")
        if measured < -eval_tol or gain < -MONOTONICITY_TOL:
            raise TheoryViolation(
                f"{kind} on edge {edge} decreased the Lyapunov function by "
                f"{-min(measured, gain):.3e}"
            )
        if abs(gain - measured) > eval_tol:
            raise TheoryViolation(
                f"{kind} on edge {edge}: reported gain {gain:.12e} differs from "
                f"the measured change {measured:.12e}"
            )
        if kind.is_consistency:
            if abs(measured - expected) > CONSISTENCY_GAIN_REL_TOL * scale:
                raise TheoryViolation(
                    f"{kind} on edge {edge}: gain {measured:.12e} differs from "
                    f"2h^2 = {expected:.12e}"
                )
        else:
            self._check_normalized(kind, edge)

    def _check_normalized(self, kind: ProjectionKind, edge: int) -> None:
        i, j = self.model.topology.edges[edge]
        v = i if kind.side is Side.ROW else j
        for name, block in (
            ("edge", self.gamma.edge_log[edge]),
            ("vertex", self.gamma.vertex_log[v]),
        ):
            mass = float(np.exp(block).sum())
            if abs(mass - 1.0) > NORMALIZATION_TOL:
                raise TheoryViolation(
                    f"{kind} on edge {edge} left the {name} block with mass {mass!r}"
                )

    def _check_greedy_progress(self, gain: float, violation: float) -> None:
        floor = violation**2 / 4.0
        if gain < floor - GREEDY_PROGRESS_TOL:
            raise TheoryViolation(
                f"greedy step gained {gain:.3e}, below the guaranteed {floor:.3e}"
            )

    def _check_tracking(self) -> None:
        _, direct = lyapunov_parts(self.dual, self.model, self.config.eta)
        drift = abs(self._variable - direct)
        if drift > LYAPUNOV_TRACKING_REL_TOL * max(1.0, abs(direct)):
            raise TheoryViolation(
                f"tracked Lyapunov value {self._variable:.12e} drifted from "
                f"{direct:.12e} after sweep {self._sweeps}"
            )

    def _end_sweep(self) -> None:
        worst = (
            self._violations.max().value
            if self._violations is not None
            else float(all_violations(self.gamma).max())
        )
        if self._trace is not None:
            self._trace.steps.append(
                StepRecord(
                    step=self._steps,
                    iteration=self._sweeps,
                    edge=-1,
                    edge_i=-1,
                    edge_j=-1,
                    kind=ProjectionKind.SWEEP_END,
                    lyapunov=self.lyapunov_value,
                    lyapunov_dual=self._variable,
                    delta_l=0.0,
                    reported_gain=0.0,
                    max_violation=worst,
                    expected_gain=float("nan"),
                    elapsed=time.perf_counter() - self._started,
                )
            )
        _LOGGER.debug(
            "Sweep %d: steps=%d max_violation=%.3e", self._sweeps, self._steps, worst
        )
        if self.config.assert_theory:
            self._check_tracking()
        if self._on_sweep is not None:
            self._on_sweep(
                SweepSnapshot(
                    sweep=self._sweeps,
                    projection_steps=self._steps,
                    gamma=self.gamma,
                    dual=self.dual,
                    max_violation=worst,
                    lyapunov=self.lyapunov_value,
                    lyapunov_dual=self._variable,
                )
            )

    def _result(self, converged: bool, iterations: int) -> SolveResult:
        worst = float(all_violations(self.gamma).max())
        margin = integrality_margin(self.gamma)
        _, final_variable = lyapunov_parts(self.dual, self.model, self.config.eta)
        if self._trace is not None:
            self._trace.status = "converged" if converged else "not_converged"
        _LOGGER.info(
            "EMP-%s finished: iterations=%d steps=%d converged=%s margin=%.4f",
            self.config.variant,
            iterations,
            self._steps,
            converged,
            margin,
        )
        return SolveResult(
            rounded=round_marginals(self.gamma),
            final_marginals=self.gamma,
            final_dual=self.dual,
            iterations_used=iterations,
            projection_steps=self._steps,
            converged=converged,
            integrality_margin=margin,
            max_violation=worst,
            lyapunov_gain=final_variable - self._initial_variable,
            variant=self.config.variant,
            trace=self._trace,
        )


# -----------------------------------------------------------------------------
# Convenience entry points
# -----------------------------------------------------------------------------


def emp_cyclic(
    model: PairwiseModel, config: SolverConfig, **kwargs: Any
) -> SolveResult:
    """Run EMP-cyclic: all four projections on every edge, in edge order."""
    config = dataclasses.replace(config, variant=Variant.CYCLIC)
    return EmpSolver(model, config, **kwargs).run()


def emp_greedy(
    model: PairwiseModel, config: SolverConfig, **kwargs: Any
) -> SolveResult:
    """Run EMP-greedy: repair the largest violation first."""
    config = dataclasses.replace(config, variant=Variant.GREEDY)
    return EmpSolver(model, config, **kwargs).run()
