"""Seeded experiment batteries.

Each trial draws one instance (graph + Potts costs) from its seed, solves it
exactly by enumeration when that is affordable, then runs every requested
(eta, variant) pair on the same instance with a fixed sweep budget. Per-sweep
Hamming distances to the exact MAP are recorded for every run.
"""

from __future__ import annotations

import concurrent.futures
import logging
import math
import statistics
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any, cast

import numpy as np

from .artifacts import write_csv_atomic, write_json_atomic
from .const import (
    DEFAULT_ALPHA_RANGE,
    DEFAULT_BETA_CHOICES,
    DEFAULT_EPSILON,
    DEFAULT_LABELS,
    DEFAULT_SWEEP_BUDGET,
    DEFAULT_WORKERS,
    EXPERIMENT_CSV_HEADER,
    EXPERIMENT_FILE,
    INTEGRALITY_MARGIN,
    LOGGER_NAME,
    SUMMARY_FILE,
)
from .core import (
    ConfigError,
    GraphTopology,
    OracleResult,
    PairwiseModel,
    PottsConfig,
    TooLarge,
    brute_force_map,
    erdos_renyi,
    grid_graph,
    potts_model,
)
from .solver import EmpSolver, SolverConfig, SweepSnapshot, Variant, round_marginals

_LOGGER = logging.getLogger(LOGGER_NAME)


class Family(StrEnum):
    """Graph family of an experiment."""

    GRID = "grid"
    ERDOS_RENYI = "erdos_renyi"


def _float_tuple(value: Any, key: str) -> tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"experiment key {key!r} must be a non-empty list")
    try:
        return tuple(float(v) for v in cast(list[Any], value))
    except (TypeError, ValueError) as err:
        raise ConfigError(f"experiment key {key!r} must hold numbers") from err


def _int_tuple(value: Any, key: str) -> tuple[int, ...]:
    numbers = _float_tuple(value, key)
    if any(not x.is_integer() for x in numbers):
        raise ConfigError(f"experiment key {key!r} must hold integers")
    return tuple(int(x) for x in numbers)


@dataclass(frozen=True)
class ExperimentSpec:
    """Protocol of one experiment battery.

    Attributes:
        family: Graph family.
        sizes: Grid side lengths, or vertex counts for random graphs.
        eta_values: Regularization strengths to compare.
        epsilon: l1 stopping threshold.
        variants: Solver variants to run.
        trials: Instances per (size, degree cap).
        base_seed: Root of every instance seed.
        iteration_budget: Sweep cap per run; greedy gets `|E|` steps per sweep.
        degree_caps: Degree caps for random graphs (`None` means uncapped).
        d: Label count.
        alpha_range: Vertex cost range of the Potts costs.
        beta_choices: Edge diagonal values of the Potts costs.
    """

    family: Family
    sizes: tuple[int, ...]
    eta_values: tuple[float, ...]
    epsilon: float = DEFAULT_EPSILON
    variants: tuple[Variant, ...] = (Variant.CYCLIC, Variant.GREEDY)
    trials: int = 20
    base_seed: int = 0
    iteration_budget: int = DEFAULT_SWEEP_BUDGET
    degree_caps: tuple[int | None, ...] = (None,)
    d: int = DEFAULT_LABELS
    alpha_range: tuple[float, float] = DEFAULT_ALPHA_RANGE
    beta_choices: tuple[float, ...] = field(default=DEFAULT_BETA_CHOICES)

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "family", Family(self.family))
            variants = tuple(Variant(v) for v in self.variants)
        except ValueError as err:
            raise ConfigError(str(err)) from err
        object.__setattr__(self, "variants", variants)
        if not self.sizes or not self.eta_values or not self.variants:
            raise ConfigError("sizes, eta_values and variants must be non-empty")
        if not self.degree_caps:
            raise ConfigError("degree_caps must be non-empty")
        if any(cap is not None and cap < 1 for cap in self.degree_caps):
            raise ConfigError(f"degree caps must be at least 1: {self.degree_caps}")
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if self.iteration_budget < 1:
            raise ConfigError(f"iteration_budget must be >= 1: {self.iteration_budget}")
        if not self.epsilon > 0.0 or any(not eta > 0.0 for eta in self.eta_values):
            raise ConfigError("epsilon and every eta must be positive")
        if self.family is Family.GRID and any(s < 2 for s in self.sizes):
            raise ConfigError("grid sides must be at least 2")
        if self.family is Family.ERDOS_RENYI and any(s < 2 for s in self.sizes):
            raise ConfigError("random graphs need at least 2 vertices")
        if self.base_seed < 0:
            raise ConfigError(f"base_seed must be non-negative: {self.base_seed}")
        # Costs are validated eagerly rather than on the first worker.
        PottsConfig(
            d=self.d, alpha_range=self.alpha_range, beta_choices=self.beta_choices
        )

    @classmethod
    def from_json_dict(cls, payload: Mapping[str, Any]) -> ExperimentSpec:
        """Decode a spec file; unknown keys are rejected."""
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ConfigError(f"unknown experiment keys: {', '.join(unknown)}")
        for key in ("family", "sizes", "eta_values"):
            if key not in payload:
                raise ConfigError(f"experiment spec is missing {key!r}")

        kwargs: dict[str, Any] = {
            "family": payload["family"],
            "sizes": _int_tuple(payload["sizes"], "sizes"),
            "eta_values": _float_tuple(payload["eta_values"], "eta_values"),
        }
        if "variants" in payload:
            raw_variants: Any = payload["variants"]
            if not isinstance(raw_variants, list):
                raise ConfigError("experiment key 'variants' must be a list")
            kwargs["variants"] = tuple(str(v) for v in cast(list[Any], raw_variants))
        if "degree_caps" in payload:
            raw_caps: Any = payload["degree_caps"]
            if not isinstance(raw_caps, list):
                raise ConfigError("experiment key 'degree_caps' must be a list")
            caps = cast(list[Any], raw_caps)
            kwargs["degree_caps"] = tuple(
                None if c is None else _int_tuple([c], "degree_caps")[0] for c in caps
            )
        if "epsilon" in payload:
            kwargs["epsilon"] = _float_tuple([payload["epsilon"]], "epsilon")[0]
        for key in ("trials", "base_seed", "iteration_budget", "d"):
            if key in payload:
                kwargs[key] = _int_tuple([payload[key]], key)[0]
        if "alpha_range" in payload:
            bounds = _float_tuple(payload["alpha_range"], "alpha_range")
            if len(bounds) != 2:
                raise ConfigError("experiment key 'alpha_range' needs two numbers")
            low, high = bounds
            kwargs["alpha_range"] = (low, high)
        if "beta_choices" in payload:
            kwargs["beta_choices"] = _float_tuple(
                payload["beta_choices"], "beta_choices"
            )
        return cls(**kwargs)

    def to_json_dict(self) -> dict[str, Any]:
        """Encode back to the spec file format."""
        return {
            "family": str(self.family),
            "sizes": list(self.sizes),
            "eta_values": list(self.eta_values),
            "epsilon": self.epsilon,
            "variants": [str(v) for v in self.variants],
            "trials": self.trials,
            "base_seed": self.base_seed,
            "iteration_budget": self.iteration_budget,
            "degree_caps": list(self.degree_caps),
            "d": self.d,
            "alpha_range": list(self.alpha_range),
            "beta_choices": list(self.beta_choices),
        }


# -----------------------------------------------------------------------------
# Instances
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class InstanceKey:
    """Identity of one generated instance."""

    family: Family
    size: int
    deg_cap: int | None
    trial: int


def instance_seed(base_seed: int, key: InstanceKey) -> int:
    """Derive a 64-bit instance seed from the base seed and the instance key."""
    entropy = (
        base_seed,
        list(Family).index(key.family),
        key.size,
        -1 if key.deg_cap is None else key.deg_cap,
        key.trial,
    )
    sequence = np.random.SeedSequence([x + 1 for x in entropy])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def build_instance(spec: ExperimentSpec, key: InstanceKey) -> PairwiseModel:
    """Generate the model of one trial."""
    seed = instance_seed(spec.base_seed, key)
    topology: GraphTopology
    if key.family is Family.GRID:
        topology = grid_graph(key.size, spec.d)
    else:
        topology = erdos_renyi(key.size, seed, key.deg_cap, spec.d)
    config = PottsConfig(
        d=spec.d,
        alpha_range=spec.alpha_range,
        beta_choices=spec.beta_choices,
        seed=seed,
    )
    return potts_model(topology, config)


def instance_keys(spec: ExperimentSpec) -> list[InstanceKey]:
    """Every instance of a spec, in output order."""
    caps: Sequence[int | None] = (
        spec.degree_caps if spec.family is Family.ERDOS_RENYI else (None,)
    )
    return [
        InstanceKey(family=spec.family, size=size, deg_cap=cap, trial=trial)
        for size in spec.sizes
        for cap in caps
        for trial in range(spec.trials)
    ]


# -----------------------------------------------------------------------------
# Running
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class RunOutcome:
    """One (instance, eta, variant) run.

    Attributes:
        n: Vertex count of the instance.
        eta: Regularization used.
        variant: Solver variant.
        unique: Exact optimum is unique; `None` when enumeration was skipped.
        recovered: Rounded output equals the exact MAP; `None` when skipped.
        integrality_margin: Margin of the final marginals.
        converged: Stopping criterion met within the budget.
        sweeps: Sweeps executed (greedy: ceil(steps / |E|)).
        projection_steps: Projections executed.
        rows: Experiment CSV rows, one per sweep.
    """

    key: InstanceKey
    n: int
    eta: float
    variant: Variant
    unique: bool | None
    recovered: bool | None
    integrality_margin: float
    converged: bool
    sweeps: int
    projection_steps: int
    rows: tuple[tuple[str, ...], ...]


def _solve_exactly(model: PairwiseModel) -> OracleResult | None:
    try:
        return brute_force_map(model)
    except TooLarge as err:
        _LOGGER.debug("Skipping exact comparison: %s", err)
        return None


def run_instance(spec: ExperimentSpec, key: InstanceKey) -> list[RunOutcome]:
    """Solve one instance under every (eta, variant) of the spec."""
    model = build_instance(spec, key)
    exact = _solve_exactly(model)
    n = model.n
    num_edges = model.topology.num_edges
    cap_text = "" if key.deg_cap is None else str(key.deg_cap)
    outcomes: list[RunOutcome] = []

    for eta in spec.eta_values:
        for variant in spec.variants:
            budget = spec.iteration_budget
            if variant is Variant.GREEDY:
                budget *= num_edges
            config = SolverConfig(
                eta=eta, epsilon=spec.epsilon, max_iterations=budget, variant=variant
            )
            rows: list[tuple[str, ...]] = []

            def on_sweep(
                snap: SweepSnapshot,
                eta: float = eta,
                variant: Variant = variant,
                rows: list[tuple[str, ...]] = rows,
            ) -> None:
                hamming = ""
                if exact is not None:
                    distance = round_marginals(snap.gamma).hamming(exact.best)
                    hamming = repr(distance / n)
                rows.append(
                    (
                        str(key.family),
                        str(n),
                        cap_text,
                        repr(eta),
                        str(variant),
                        str(key.trial),
                        str(snap.sweep),
                        hamming,
                        repr(snap.max_violation),
                        repr(snap.lyapunov),
                    )
                )

            result = EmpSolver(model, config, on_sweep=on_sweep).run()
            recovered = None if exact is None else result.rounded == exact.best
            sweeps = (
                result.iterations_used
                if variant is Variant.CYCLIC
                else math.ceil(result.iterations_used / num_edges)
            )
            outcomes.append(
                RunOutcome(
                    key=key,
                    n=n,
                    eta=eta,
                    variant=variant,
                    unique=None if exact is None else exact.unique,
                    recovered=recovered,
                    integrality_margin=result.integrality_margin,
                    converged=result.converged,
                    sweeps=sweeps,
                    projection_steps=result.projection_steps,
                    rows=tuple(rows),
                )
            )
    _LOGGER.debug("Finished %s", key)
    return outcomes


# -----------------------------------------------------------------------------
# Summary
# -----------------------------------------------------------------------------


def _rate(hits: int, total: int) -> float | None:
    return hits / total if total else None


def _median(values: Sequence[int]) -> float | None:
    return float(statistics.median(values)) if values else None


def summarize(outcomes: Sequence[RunOutcome]) -> list[dict[str, Any]]:
    """Recovery and convergence statistics per (family, n, deg_cap, eta, variant).

    Recovery counts only trials whose exact optimum is unique; `filtered_*`
    further requires an integrality margin of at least 0.9.
    """
    groups: dict[tuple[str, int, int, float, str], list[RunOutcome]] = {}
    for o in outcomes:
        cap = -1 if o.key.deg_cap is None else o.key.deg_cap
        group = (str(o.key.family), o.n, cap, o.eta, str(o.variant))
        groups.setdefault(group, []).append(o)

    summary: list[dict[str, Any]] = []
    for (family, n, cap, eta, variant), items in sorted(groups.items()):
        unique = [o for o in items if o.unique]
        filtered = [o for o in unique if o.integrality_margin >= INTEGRALITY_MARGIN]
        recovered = sum(1 for o in unique if o.recovered)
        filtered_recovered = sum(1 for o in filtered if o.recovered)
        converged = [o for o in items if o.converged]
        summary.append(
            {
                "family": family,
                "n": n,
                "deg_cap": None if cap < 0 else cap,
                "eta": eta,
                "variant": variant,
                "trials": len(items),
                "unique_trials": len(unique),
                "ambiguous_trials": sum(1 for o in items if o.unique is False),
                "unverified_trials": sum(1 for o in items if o.unique is None),
                "recovered": recovered,
                "recovery_rate": _rate(recovered, len(unique)),
                "filtered_trials": len(filtered),
                "filtered_recovered": filtered_recovered,
                "filtered_recovery_rate": _rate(filtered_recovered, len(filtered)),
                "converged": len(converged),
                "median_sweeps": _median([o.sweeps for o in converged]),
                "median_projection_steps": _median(
                    [o.projection_steps for o in converged]
                ),
            }
        )
    return summary


@dataclass(frozen=True)
class ExperimentReport:
    """Everything an experiment battery produced."""

    spec: ExperimentSpec
    outcomes: tuple[RunOutcome, ...]
    summary: tuple[dict[str, Any], ...]

    @property
    def rows(self) -> list[tuple[str, ...]]:
        """Experiment CSV rows in deterministic order."""
        return [row for o in self.outcomes for row in o.rows]

    def write(self, out_dir: Path) -> tuple[Path, Path]:
        """Write the CSV and the summary JSON into `out_dir`."""
        csv_path = write_csv_atomic(
            out_dir / EXPERIMENT_FILE, EXPERIMENT_CSV_HEADER, self.rows
        )
        json_path = write_json_atomic(
            out_dir / SUMMARY_FILE,
            {"spec": self.spec.to_json_dict(), "groups": list(self.summary)},
        )
        return csv_path, json_path


def run_experiment(
    spec: ExperimentSpec, *, workers: int = DEFAULT_WORKERS
) -> ExperimentReport:
    """Run every instance of a spec in a thread pool.

    Instances are independent; results are collected in instance order, so the
    output does not depend on scheduling.
    """
    keys = instance_keys(spec)
    _LOGGER.info(
        "Running %d instances x %d eta x %d variants with %d workers",
        len(keys),
        len(spec.eta_values),
        len(spec.variants),
        workers,
    )

    def one(key: InstanceKey) -> list[RunOutcome]:
        return run_instance(spec, key)

    outcomes: list[RunOutcome] = []
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, workers)) as ex:
        for batch in ex.map(one, keys):
            outcomes.extend(batch)

    summary = summarize(outcomes)
    for group in summary:
        _LOGGER.info(
            "%s n=%s cap=%s eta=%s %s: recovery=%s filtered=%s median_sweeps=%s",
            group["family"],
            group["n"],
            group["deg_cap"],
            group["eta"],
            group["variant"],
            group["recovery_rate"],
            group["filtered_recovery_rate"],
            group["median_sweeps"],
        )
    return ExperimentReport(spec=spec, outcomes=tuple(outcomes), summary=tuple(summary))
