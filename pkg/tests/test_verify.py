"""Tests for the invariant suite."""

from __future__ import annotations

import numpy as np
import pytest

from emp_inference.core import (
    DualState,
    MarginalVector,
    PairwiseModel,
    PottsConfig,
    erdos_renyi,
    grid_graph,
    potts_model,
    scale_rows,
)
from emp_inference.experiment import ExperimentSpec, Family
from emp_inference.solver import ProjectionKind, Variant
from emp_inference.verify import (
    Battery,
    PropertyResult,
    VerifyReport,
    check_oracle_equivalence,
    check_round_trip,
    default_battery,
    failed_names,
    model_battery,
    round_trip_model,
    run_verify,
    spec_battery,
)

PROPERTY_ORDER = [
    "consistency_gain",
    "monotonicity",
    "lyapunov_tracking",
    "iteration_bound",
    "gain_bound",
    "greedy_progress",
    "oracle_equivalence",
    "round_trip",
    "run_errors",
]


def _understepped_left_consistency(
    gamma: MarginalVector, dual: DualState, edge: int
) -> float:
    # Moves 0.3 instead of 0.5 of the log gap but reports the full-step gain.
    i = gamma.topology.edges[edge][0]
    rows = np.exp(gamma.edge_log[edge]).sum(axis=1)
    vertex = np.exp(gamma.vertex_log[i])
    scale_rows(gamma, dual, edge, 0.3 * (np.log(rows) - gamma.vertex_log[i]))
    return float(np.sum((np.sqrt(rows) - np.sqrt(vertex)) ** 2))


def test_default_battery_passes() -> None:
    report = run_verify(default_battery(seeds=1), oracle_pairs=20, round_trip_steps=200)

    assert [p.name for p in report.properties] == PROPERTY_ORDER
    assert report.passed, report.lines()
    assert list(failed_names(report)) == []
    assert report.get("consistency_gain").checked > 0
    assert report.get("lyapunov_tracking").checked > 0
    assert report.get("greedy_progress").checked > 0


def test_injected_fault_is_detected() -> None:
    report = run_verify(
        default_battery(seeds=1),
        inject_fault=True,
        oracle_pairs=5,
        round_trip_steps=50,
    )

    assert not report.passed
    failed = set(failed_names(report))
    assert {"consistency_gain", "monotonicity", "lyapunov_tracking"} <= failed
    # The projection properties do not go through the solver.
    assert report.get("oracle_equivalence").passed
    assert report.get("round_trip").passed
    assert any(line.startswith("FAIL consistency_gain") for line in report.lines())


def test_wrong_step_size_is_detected() -> None:
    report = run_verify(
        default_battery(seeds=1),
        projections={ProjectionKind.LEFT_CONS: _understepped_left_consistency},
        oracle_pairs=5,
        round_trip_steps=50,
    )

    assert not report.passed
    assert not report.get("consistency_gain").passed
    assert not report.get("lyapunov_tracking").passed
    # The short step still improves the Lyapunov function.
    assert report.get("monotonicity").passed


def test_property_lines_and_json() -> None:
    ok = PropertyResult("round_trip", True, 0.0, 3)
    bad = PropertyResult("gain_bound", False, float("inf"), 1, "grid eta=1")

    assert ok.line().startswith("PASS round_trip ")
    assert ok.line().endswith("worst=0.000e+00 checked=3")
    assert bad.line().startswith("FAIL gain_bound ")
    assert bad.line().endswith("checked=1  grid eta=1")
    assert bad.to_json_dict()["worst"] == "inf"

    report = VerifyReport(properties=(ok, bad))
    assert not report.passed
    assert report.to_json_dict()["properties"][0]["name"] == "round_trip"
    with pytest.raises(KeyError):
        report.get("missing")


def test_projection_properties() -> None:
    assert check_oracle_equivalence(pairs=30, seed=3).passed
    round_trip = check_round_trip(round_trip_model(seed=1), 10.0, steps=500, seed=1)
    assert round_trip.passed
    assert round_trip.worst <= 1e-10


def test_battery_builders() -> None:
    default = default_battery(seed=4, seeds=2)
    assert [label for label, _ in default.models] == [
        "grid2-d2-s4",
        "grid2-d2-s5",
        "grid2-d3-s4",
        "grid2-d3-s5",
    ]

    single = model_battery(round_trip_model(), eta=3.0)
    assert single.etas == (3.0,)
    assert single.epsilons == (1e-1, 1e-2)

    spec = ExperimentSpec(
        family=Family.GRID,
        sizes=(2,),
        eta_values=(2.0,),
        variants=(Variant.GREEDY,),
        trials=2,
    )
    from_spec = spec_battery(spec)
    assert len(from_spec.models) == 2
    assert from_spec.variants == (Variant.GREEDY,)
    assert from_spec.epsilons == (spec.epsilon,)


@pytest.mark.slow
def test_full_battery_on_grids_and_random_graphs() -> None:
    models: list[tuple[str, PairwiseModel]] = []
    for d in (2, 3):
        for side in (2, 3, 4):
            for seed in range(4):
                model = potts_model(grid_graph(side, d), PottsConfig(d=d, seed=seed))
                models.append((f"grid{side}-d{d}-s{seed}", model))
        for n in (10, 20, 30):
            for seed in range(5):
                topology = erdos_renyi(n, seed, d=d)
                config = PottsConfig(d=d, seed=seed)
                models.append((f"er{n}-d{d}-s{seed}", potts_model(topology, config)))
    battery = Battery(models=tuple(models))

    report = run_verify(battery, oracle_pairs=1000, round_trip_steps=10**4)

    assert report.passed, report.lines()
    runs = len(models) * len(battery.epsilons) * len(battery.variants)
    assert report.get("iteration_bound").checked == runs
    assert report.get("gain_bound").checked == runs
    assert report.get("oracle_equivalence").checked == 1000
    assert report.get("round_trip").worst <= 1e-10
