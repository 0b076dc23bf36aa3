"""Tests for experiment specs, instance generation and batteries."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from emp_inference.const import EXPERIMENT_CSV_HEADER, EXPERIMENT_FILE, SUMMARY_FILE
from emp_inference.core import ConfigError, brute_force_map
from emp_inference.experiment import (
    ExperimentSpec,
    Family,
    InstanceKey,
    build_instance,
    instance_keys,
    instance_seed,
    run_experiment,
    run_instance,
    summarize,
)
from emp_inference.solver import SolverConfig, Variant, emp_cyclic, emp_greedy


def _grid_spec(**overrides) -> ExperimentSpec:
    kwargs = {
        "family": Family.GRID,
        "sizes": (2,),
        "eta_values": (5.0,),
        "trials": 2,
        "iteration_budget": 5,
    }
    kwargs.update(overrides)
    return ExperimentSpec(**kwargs)


# -----------------------------------------------------------------------------
# Spec parsing
# -----------------------------------------------------------------------------


def test_spec_from_json_defaults() -> None:
    spec = ExperimentSpec.from_json_dict(
        {"family": "grid", "sizes": [10, 20], "eta_values": [1, 50]}
    )

    assert spec.family is Family.GRID
    assert spec.sizes == (10, 20)
    assert spec.eta_values == (1.0, 50.0)
    assert spec.variants == (Variant.CYCLIC, Variant.GREEDY)
    assert spec.trials == 20
    assert spec.degree_caps == (None,)


def test_spec_json_round_trip() -> None:
    spec = ExperimentSpec(
        family=Family.ERDOS_RENYI,
        sizes=(50, 100),
        eta_values=(10.0, 50.0),
        variants=(Variant.GREEDY,),
        trials=3,
        base_seed=9,
        degree_caps=(None, 5),
        alpha_range=(-0.25, 0.25),
        beta_choices=(-0.2, 0.0, 0.2),
    )

    assert ExperimentSpec.from_json_dict(spec.to_json_dict()) == spec


@pytest.mark.parametrize(
    ("payload", "message"),
    [
        ({"family": "grid", "sizes": [2], "eta_values": [1], "bogus": 1}, "unknown"),
        ({"sizes": [2], "eta_values": [1]}, "missing 'family'"),
        ({"family": "grid", "eta_values": [1]}, "missing 'sizes'"),
        ({"family": "torus", "sizes": [2], "eta_values": [1]}, "torus"),
        ({"family": "grid", "sizes": [2.5], "eta_values": [1]}, "integers"),
        ({"family": "grid", "sizes": [], "eta_values": [1]}, "non-empty"),
        ({"family": "grid", "sizes": [1], "eta_values": [1]}, "at least 2"),
        ({"family": "grid", "sizes": [2], "eta_values": [0]}, "positive"),
        (
            {"family": "grid", "sizes": [2], "eta_values": [1], "trials": 0},
            "trials",
        ),
        (
            {"family": "grid", "sizes": [2], "eta_values": [1], "alpha_range": [1]},
            "two numbers",
        ),
        (
            {
                "family": "grid",
                "sizes": [2],
                "eta_values": [1],
                "variants": ["sideways"],
            },
            "sideways",
        ),
        (
            {
                "family": "erdos_renyi",
                "sizes": [10],
                "eta_values": [1],
                "degree_caps": [None, 0],
            },
            "degree caps must be at least 1",
        ),
    ],
)
def test_spec_errors(payload: dict, message: str) -> None:
    with pytest.raises(ConfigError, match=message):
        ExperimentSpec.from_json_dict(payload)


# -----------------------------------------------------------------------------
# Instances
# -----------------------------------------------------------------------------


def test_instance_seed_is_stable_and_distinct() -> None:
    key = InstanceKey(family=Family.GRID, size=10, deg_cap=None, trial=0)
    seed = instance_seed(0, key)

    assert seed == instance_seed(0, key)
    assert 0 <= seed < 2**64
    assert seed != instance_seed(1, key)
    assert seed != instance_seed(0, InstanceKey(Family.GRID, 10, None, 1))
    assert seed != instance_seed(0, InstanceKey(Family.GRID, 10, 0, 0))


def test_instance_keys_ignore_caps_for_grids() -> None:
    grid = _grid_spec(sizes=(2, 3), degree_caps=(None, 5))
    assert [(k.size, k.deg_cap, k.trial) for k in instance_keys(grid)] == [
        (2, None, 0),
        (2, None, 1),
        (3, None, 0),
        (3, None, 1),
    ]

    er = ExperimentSpec(
        family=Family.ERDOS_RENYI,
        sizes=(20,),
        eta_values=(1.0,),
        trials=1,
        degree_caps=(None, 4),
    )
    assert [k.deg_cap for k in instance_keys(er)] == [None, 4]


def test_build_instance() -> None:
    spec = _grid_spec(sizes=(3,))
    first, second = (build_instance(spec, k) for k in instance_keys(spec))

    assert first.n == 9
    assert first.topology.edges == second.topology.edges
    assert first.costs.vertex_costs.tolist() != second.costs.vertex_costs.tolist()


# -----------------------------------------------------------------------------
# Running
# -----------------------------------------------------------------------------


def test_run_instance_records_one_row_per_sweep() -> None:
    spec = _grid_spec()
    outcomes = run_instance(spec, instance_keys(spec)[0])

    assert [o.variant for o in outcomes] == [Variant.CYCLIC, Variant.GREEDY]
    for outcome in outcomes:
        assert outcome.unique is not None
        assert outcome.recovered is not None
        assert outcome.sweeps <= spec.iteration_budget
        assert len(outcome.rows) == outcome.sweeps
        for index, row in enumerate(outcome.rows, start=1):
            assert len(row) == len(EXPERIMENT_CSV_HEADER)
            assert row[0] == "grid"
            assert row[2] == ""
            assert row[6] == str(index)
            assert 0.0 <= float(row[7]) <= 1.0


def test_random_graphs_over_the_enumeration_limit_are_unverified() -> None:
    spec = ExperimentSpec(
        family=Family.ERDOS_RENYI,
        sizes=(20,),
        eta_values=(5.0,),
        variants=(Variant.CYCLIC,),
        trials=1,
        iteration_budget=2,
        degree_caps=(4,),
    )
    report = run_experiment(spec, workers=1)

    (group,) = report.summary
    assert group["unverified_trials"] == 1
    assert group["recovery_rate"] is None
    assert group["deg_cap"] == 4
    assert all(row[7] == "" and row[2] == "4" for row in report.rows)


def test_summary_groups() -> None:
    spec = _grid_spec(eta_values=(1.0, 5.0))
    report = run_experiment(spec, workers=2)

    assert len(report.outcomes) == 2 * 2 * 2
    assert [(g["eta"], g["variant"]) for g in report.summary] == [
        (1.0, "cyclic"),
        (1.0, "greedy"),
        (5.0, "cyclic"),
        (5.0, "greedy"),
    ]
    for group in report.summary:
        assert group["trials"] == 2
        assert group["unique_trials"] + group["ambiguous_trials"] == 2
        assert group["unverified_trials"] == 0
        assert group["filtered_trials"] <= group["unique_trials"]
    assert summarize(list(report.outcomes)) == list(report.summary)


def test_results_do_not_depend_on_worker_count() -> None:
    spec = _grid_spec(trials=3)

    serial = run_experiment(spec, workers=1)
    pooled = run_experiment(spec, workers=3)

    assert serial.rows == pooled.rows
    assert serial.summary == pooled.summary


def test_report_files(tmp_path: Path) -> None:
    spec = _grid_spec(variants=(Variant.CYCLIC,))
    report = run_experiment(spec, workers=1)

    csv_path, json_path = report.write(tmp_path / "out")

    assert csv_path == tmp_path / "out" / EXPERIMENT_FILE
    assert json_path == tmp_path / "out" / SUMMARY_FILE
    lines = csv_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(EXPERIMENT_CSV_HEADER)
    assert len(lines) == 1 + len(report.rows)
    summary = json.loads(json_path.read_text(encoding="utf-8"))
    assert summary["spec"] == spec.to_json_dict()
    assert len(summary["groups"]) == 1


# -----------------------------------------------------------------------------
# Full-scale batteries
# -----------------------------------------------------------------------------


def _group(
    summary: list[dict], eta: float, variant: Variant, cap: int | None = None
) -> dict:
    (group,) = [
        g
        for g in summary
        if g["eta"] == eta and g["variant"] == str(variant) and g["deg_cap"] == cap
    ]
    return group


@pytest.mark.slow
def test_large_eta_recovers_the_exact_map_on_small_grids() -> None:
    spec = ExperimentSpec(
        family=Family.GRID,
        sizes=(3,),
        eta_values=(2.0, 700.0),
        epsilon=1e-3,
        trials=20,
        iteration_budget=80,
    )

    summary = list(run_experiment(spec, workers=4).summary)

    for variant in (Variant.CYCLIC, Variant.GREEDY):
        sharp = _group(summary, 700.0, variant)
        blurred = _group(summary, 2.0, variant)
        assert sharp["trials"] == 20
        assert sharp["unverified_trials"] == 0
        assert sharp["filtered_trials"] > 0
        assert sharp["filtered_recovery_rate"] == 1.0
        assert blurred["unique_trials"] == sharp["unique_trials"]
        assert blurred["recovery_rate"] < sharp["recovery_rate"]


@pytest.mark.slow
def test_higher_degree_caps_need_more_sweeps() -> None:
    spec = ExperimentSpec(
        family=Family.ERDOS_RENYI,
        sizes=(50,),
        eta_values=(50.0,),
        epsilon=1e-3,
        trials=20,
        degree_caps=(5, 10),
    )

    summary = list(run_experiment(spec, workers=4).summary)

    for variant in (Variant.CYCLIC, Variant.GREEDY):
        low = _group(summary, 50.0, variant, cap=5)
        high = _group(summary, 50.0, variant, cap=10)
        assert low["converged"] > 0
        assert high["converged"] > 0
        assert high["median_sweeps"] > low["median_sweeps"]


@pytest.mark.slow
def test_variants_agree_when_both_are_confident() -> None:
    spec = _grid_spec(sizes=(3,), eta_values=(700.0,), trials=10)
    config = SolverConfig(eta=700.0, epsilon=1e-3)
    compared = 0

    for key in instance_keys(spec):
        model = build_instance(spec, key)
        cyclic = emp_cyclic(model, config)
        greedy = emp_greedy(model, config)
        confident = (
            cyclic.converged
            and greedy.converged
            and min(cyclic.integrality_margin, greedy.integrality_margin) >= 0.9
        )
        if not confident:
            continue
        compared += 1
        assert cyclic.rounded == greedy.rounded
        exact = brute_force_map(model)
        if exact.unique:
            assert cyclic.rounded == exact.best

    assert compared > 0
