"""Invariant suite for the projections and both solver variants.

Runs a battery of seeded models through EMP-cyclic and EMP-greedy with full
traces and checks, per property, the worst residual over every step. Step
gains are the ones the solver measured from the duals, not the values the
projections report about themselves.

- consistency_gain: consistency gains equal twice the squared Hellinger
  distance of the repaired violation
- monotonicity: no projection decreases the Lyapunov function
- lyapunov_tracking: the incrementally tracked value matches a full
  evaluation after every sweep
- iteration_bound: runs finish within the sweep / step bounds from S0
- gain_bound: the total gain never exceeds S0
- greedy_progress: each greedy step gains at least violation**2 / 4
- oracle_equivalence: the closed-form update matches a numerical KL projection
- round_trip: log-marginals can be rebuilt from the dual variables
- run_errors: no run raised
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .const import (
    CONSISTENCY_GAIN_REL_TOL,
    CONSISTENCY_TOL,
    DEFAULT_LABELS,
    DEFAULT_ORACLE_PAIRS,
    DEFAULT_VERIFY_EPSILONS,
    DEFAULT_VERIFY_ETA,
    DEFAULT_VERIFY_SEEDS,
    FAULT_SWEEPS,
    GAIN_BOUND_TOL,
    GREEDY_PROGRESS_TOL,
    LOGGER_NAME,
    LYAPUNOV_EVAL_REL_TOL,
    LYAPUNOV_TRACKING_REL_TOL,
    MONOTONICITY_TOL,
    ORACLE_MATCH_TOL,
    ROUND_TRIP_STEPS,
)
from .core import (
    DualState,
    EmpError,
    GraphTopology,
    MarginalVector,
    PairwiseModel,
    PottsConfig,
    ProjectionFn,
    Side,
    all_violations,
    compute_S0,
    decomposition_residual,
    grid_graph,
    iteration_bounds,
    kl_projection_oracle,
    new_dual_state,
    potts_model,
    project_left_consistency,
    project_right_consistency,
    scale_rows,
)
from .experiment import ExperimentSpec, build_instance, instance_keys
from .solver import (
    DEFAULT_PROJECTIONS,
    EmpSolver,
    ProjectionKind,
    SolveResult,
    SolverConfig,
    SweepCallback,
    SweepSnapshot,
    Variant,
    initialize,
    lyapunov_parts,
)

_LOGGER = logging.getLogger(LOGGER_NAME)


@dataclass(frozen=True)
class PropertyResult:
    """Outcome of one property over the whole battery.

    Attributes:
        name: Property id.
        passed: Every check stayed within tolerance.
        worst: Worst residual observed (meaning depends on the property).
        checked: Number of individual checks.
        detail: Where the worst residual occurred.
    """

    name: str
    passed: bool
    worst: float
    checked: int
    detail: str = ""

    def line(self) -> str:
        """One human-readable report line."""
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name:<20} worst={self.worst:.3e} checked={self.checked}"
        return f"{text}  {self.detail}" if self.detail else text

    def to_json_dict(self) -> dict[str, Any]:
        worst = self.worst if math.isfinite(self.worst) else repr(self.worst)
        return {
            "name": self.name,
            "passed": self.passed,
            "worst": worst,
            "checked": self.checked,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class VerifyReport:
    """All property results of one verify invocation."""

    properties: tuple[PropertyResult, ...]

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.properties)

    def get(self, name: str) -> PropertyResult:
        """Result of one property by name."""
        for prop in self.properties:
            if prop.name == name:
                return prop
        raise KeyError(name)

    def lines(self) -> list[str]:
        return [p.line() for p in self.properties]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "properties": [p.to_json_dict() for p in self.properties],
        }


@dataclass(frozen=True)
class Battery:
    """Models and run settings the solver properties are checked on.

    Attributes:
        models: `(label, model)` pairs.
        etas: Regularization strengths.
        epsilons: Stopping thresholds.
        variants: Solver variants.
    """

    models: tuple[tuple[str, PairwiseModel], ...]
    etas: tuple[float, ...] = (DEFAULT_VERIFY_ETA,)
    epsilons: tuple[float, ...] = DEFAULT_VERIFY_EPSILONS
    variants: tuple[Variant, ...] = (Variant.CYCLIC, Variant.GREEDY)


def default_battery(
    *,
    eta: float = DEFAULT_VERIFY_ETA,
    seed: int = 0,
    seeds: int = DEFAULT_VERIFY_SEEDS,
) -> Battery:
    """Seeded 2 x 2 Potts grids with two and three labels."""
    models: list[tuple[str, PairwiseModel]] = []
    for d in (2, DEFAULT_LABELS):
        topology = grid_graph(2, d)
        for s in range(seed, seed + seeds):
            models.append(
                (f"grid2-d{d}-s{s}", potts_model(topology, PottsConfig(d=d, seed=s)))
            )
    return Battery(models=tuple(models), etas=(eta,))


def model_battery(
    model: PairwiseModel, *, eta: float, epsilons: Sequence[float] | None = None
) -> Battery:
    """Battery of a single user model."""
    return Battery(
        models=(("model", model),),
        etas=(eta,),
        epsilons=tuple(epsilons or DEFAULT_VERIFY_EPSILONS),
    )


def spec_battery(spec: ExperimentSpec) -> Battery:
    """Battery of every instance of an experiment spec."""
    models = tuple(
        (
            f"{key.family}-n{key.size}-cap{key.deg_cap}-t{key.trial}",
            build_instance(spec, key),
        )
        for key in instance_keys(spec)
    )
    return Battery(
        models=models,
        etas=spec.eta_values,
        epsilons=(spec.epsilon,),
        variants=spec.variants,
    )


# -----------------------------------------------------------------------------
# Fault injection
# -----------------------------------------------------------------------------


def flipped_left_consistency(
    gamma: MarginalVector, dual: DualState, edge: int
) -> float:
    """Left consistency with the scaling sign reversed.

    Pushes the row sums and `Gamma_i` apart instead of together, yet reports
    the gain the correct update would have produced.
    """
    i = gamma.topology.edges[edge][0]
    rows = np.exp(gamma.edge_log[edge]).sum(axis=1)
    vertex = np.exp(gamma.vertex_log[i])
    alpha = 0.5 * (np.log(rows) - gamma.vertex_log[i])
    scale_rows(gamma, dual, edge, -alpha)
    return float(np.sum((np.sqrt(rows) - np.sqrt(vertex)) ** 2))


FAULTY_PROJECTIONS: dict[ProjectionKind, ProjectionFn] = {
    ProjectionKind.LEFT_CONS: flipped_left_consistency,
}


# -----------------------------------------------------------------------------
# Solver properties
# -----------------------------------------------------------------------------


@dataclass
class _Worst:
    """Running maximum of one residual."""

    name: str
    value: float = 0.0
    where: str = ""
    checked: int = 0
    failed: bool = False

    def observe(self, value: float, where: str, ok: bool) -> None:
        self.checked += 1
        if not ok:
            self.failed = True
        if value > self.value or (not ok and not self.where):
            self.value, self.where = value, where

    def result(self) -> PropertyResult:
        return PropertyResult(
            name=self.name,
            passed=not self.failed,
            worst=self.value,
            checked=self.checked,
            detail=self.where,
        )


@dataclass
class _SolverChecks:
    consistency: _Worst = field(default_factory=lambda: _Worst("consistency_gain"))
    monotonicity: _Worst = field(default_factory=lambda: _Worst("monotonicity"))
    tracking: _Worst = field(default_factory=lambda: _Worst("lyapunov_tracking"))
    bound: _Worst = field(default_factory=lambda: _Worst("iteration_bound"))
    gain_bound: _Worst = field(default_factory=lambda: _Worst("gain_bound"))
    greedy: _Worst = field(default_factory=lambda: _Worst("greedy_progress"))
    errors: _Worst = field(default_factory=lambda: _Worst("run_errors"))

    def results(self) -> list[PropertyResult]:
        return [
            w.result()
            for w in (
                self.consistency,
                self.monotonicity,
                self.tracking,
                self.bound,
                self.gain_bound,
                self.greedy,
            )
        ]


def _check_run(
    checks: _SolverChecks,
    model: PairwiseModel,
    config: SolverConfig,
    result: SolveResult,
    where: str,
    initial_violation: float,
) -> None:
    assert result.trace is not None
    records = result.trace.projection_records()

    for r in records:
        tag = f"{where} step={r.step}"
        scale = max(1.0, abs(r.lyapunov_dual - r.reported_gain))
        drop = max(0.0, -r.delta_l, -r.reported_gain)
        checks.monotonicity.observe(
            drop,
            tag,
            r.delta_l >= -LYAPUNOV_EVAL_REL_TOL * scale
            and r.reported_gain >= -MONOTONICITY_TOL,
        )
        if r.kind.is_consistency:
            residual = abs(r.delta_l - r.expected_gain)
            tol = CONSISTENCY_GAIN_REL_TOL * scale
            checks.consistency.observe(residual, tag, residual <= tol)

    s0 = compute_S0(model, config.eta)
    checks.gain_bound.observe(
        max(0.0, result.lyapunov_gain - s0),
        where,
        result.lyapunov_gain <= s0 + GAIN_BOUND_TOL,
    )

    cyclic, greedy = iteration_bounds(s0, config.epsilon, model.topology.max_degree)
    bound = cyclic if config.variant is Variant.CYCLIC else greedy
    over = float(result.iterations_used - bound) if bound > 0 else 0.0
    checks.bound.observe(
        max(0.0, over),
        f"{where} iterations={result.iterations_used} bound={bound}",
        result.converged and result.iterations_used <= bound,
    )

    if config.variant is Variant.GREEDY:
        violation = initial_violation
        for first, second in zip(records[::2], records[1::2]):
            shortfall = violation**2 / 4.0 - (first.delta_l + second.delta_l)
            checks.greedy.observe(
                max(0.0, shortfall),
                f"{where} iteration={first.iteration}",
                shortfall <= GREEDY_PROGRESS_TOL,
            )
            violation = second.max_violation


def _tracking_observer(
    worst: _Worst, model: PairwiseModel, eta: float, where: str
) -> SweepCallback:
    def observe(snap: SweepSnapshot) -> None:
        _, direct = lyapunov_parts(snap.dual, model, eta)
        drift = abs(snap.lyapunov_dual - direct)
        tol = LYAPUNOV_TRACKING_REL_TOL * max(1.0, abs(direct))
        worst.observe(drift, f"{where} sweep={snap.sweep}", drift <= tol)

    return observe


def _solve_battery(
    battery: Battery, projections: Mapping[ProjectionKind, ProjectionFn] | None
) -> _SolverChecks:
    checks = _SolverChecks()
    for label, model in battery.models:
        for eta in battery.etas:
            gamma0, _ = initialize(model, eta)
            initial_violation = float(all_violations(gamma0).max(initial=0.0))
            for epsilon in battery.epsilons:
                for variant in battery.variants:
                    cap = None
                    if projections:
                        cap = FAULT_SWEEPS
                        if variant is Variant.GREEDY:
                            cap *= model.topology.num_edges
                    config = SolverConfig(
                        eta=eta,
                        epsilon=epsilon,
                        max_iterations=cap,
                        variant=variant,
                        record_trace=True,
                    )
                    where = f"{label} eta={eta:g} eps={epsilon:g} {variant}"
                    try:
                        solver = EmpSolver(
                            model,
                            config,
                            on_sweep=_tracking_observer(
                                checks.tracking, model, eta, where
                            ),
                            projections=projections,
                        )
                        result = solver.run()
                    except EmpError as err:
                        _LOGGER.warning("%s raised %s", where, err)
                        checks.errors.observe(1.0, f"{where}: {err}", False)
                        continue
                    checks.errors.observe(0.0, where, True)
                    _check_run(checks, model, config, result, where, initial_violation)
    return checks


# -----------------------------------------------------------------------------
# Projection properties
# -----------------------------------------------------------------------------


def _single_edge(d: int) -> GraphTopology:
    return GraphTopology.from_edges(2, d, [(0, 1)])


def check_oracle_equivalence(
    pairs: int = DEFAULT_ORACLE_PAIRS, seed: int = 0
) -> PropertyResult:
    """Closed-form consistency projections against the numerical KL projection."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    worst = _Worst("oracle_equivalence")
    for k in range(pairs):
        d = int(rng.integers(2, 6))
        side = Side.ROW if k % 2 == 0 else Side.COL
        joint = rng.dirichlet(np.ones(d * d)).reshape(d, d)
        vertex = rng.dirichlet(np.ones(d))

        topology = _single_edge(d)
        other = np.full(d, 1.0 / d)
        vertices = np.stack([vertex, other] if side is Side.ROW else [other, vertex])
        gamma = MarginalVector.from_linear(topology, vertices, joint[None])
        dual = new_dual_state(topology)
        if side is Side.ROW:
            project_left_consistency(gamma, dual, 0)
        else:
            project_right_consistency(gamma, dual, 0)

        oracle_joint, oracle_vertex = kl_projection_oracle(joint, vertex, side)
        v = 0 if side is Side.ROW else 1
        residual = max(
            float(np.abs(gamma.edge_marginals()[0] - oracle_joint).max()),
            float(np.abs(gamma.vertex_marginals()[v] - oracle_vertex).max()),
        )
        worst.observe(
            residual, f"pair={k} d={d} side={side}", residual <= ORACLE_MATCH_TOL
        )
    return worst.result()


def check_round_trip(
    model: PairwiseModel,
    eta: float,
    *,
    steps: int = ROUND_TRIP_STEPS,
    seed: int = 0,
) -> PropertyResult:
    """Apply random projections, then rebuild the log-marginals from the duals."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    gamma, dual = initialize(model, eta)
    kinds = list(DEFAULT_PROJECTIONS)
    edges = rng.integers(0, model.topology.num_edges, size=steps)
    picks = rng.integers(0, len(kinds), size=steps)
    for edge, pick in zip(edges.tolist(), picks.tolist()):
        DEFAULT_PROJECTIONS[kinds[pick]](gamma, dual, edge)
    residual = decomposition_residual(model, dual, eta, gamma)
    return PropertyResult(
        name="round_trip",
        passed=residual <= CONSISTENCY_TOL,
        worst=residual,
        checked=steps,
        detail=f"eta={eta:g}",
    )


def round_trip_model(d: int = DEFAULT_LABELS, seed: int = 0) -> PairwiseModel:
    """Seeded 3 x 3 Potts grid used for the round-trip property."""
    return potts_model(grid_graph(3, d), PottsConfig(d=d, seed=seed))


# -----------------------------------------------------------------------------
# Entry point
# -----------------------------------------------------------------------------


def run_verify(
    battery: Battery,
    *,
    inject_fault: bool = False,
    projections: Mapping[ProjectionKind, ProjectionFn] | None = None,
    oracle_pairs: int = DEFAULT_ORACLE_PAIRS,
    seed: int = 0,
    round_trip_steps: int = ROUND_TRIP_STEPS,
) -> VerifyReport:
    """Run every property and collect the report.

    Args:
        battery: Models and run settings for the solver properties.
        inject_fault: Replace left consistency with `flipped_left_consistency`.
        projections: Projection overrides for the solver runs; runs with any
            override are capped at a few sweeps.
        oracle_pairs: Random instances for the oracle comparison.
        seed: Seed of the projection properties.
        round_trip_steps: Random projections before the round-trip rebuild.
    """
    overrides = dict(projections or {})
    if inject_fault:
        overrides.update(FAULTY_PROJECTIONS)
    _LOGGER.info(
        "Verifying %d models x %d eta x %d epsilon x %d variants%s",
        len(battery.models),
        len(battery.etas),
        len(battery.epsilons),
        len(battery.variants),
        " with projection overrides" if overrides else "",
    )
    checks = _solve_battery(battery, overrides or None)
    results: list[PropertyResult] = checks.results()
    results.append(check_oracle_equivalence(oracle_pairs, seed))
    results.append(
        check_round_trip(
            round_trip_model(seed=seed),
            battery.etas[0],
            steps=round_trip_steps,
            seed=seed,
        )
    )
    results.append(checks.errors.result())
    report = VerifyReport(properties=tuple(results))
    for line in report.lines():
        _LOGGER.debug(line)
    return report


def failed_names(report: VerifyReport) -> Iterable[str]:
    """Names of the properties that failed."""
    return (p.name for p in report.properties if not p.passed)
