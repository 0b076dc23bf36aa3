"""Tests for the theory constants and thresholds."""

from __future__ import annotations

import math

import numpy as np
import pytest

from emp_inference.core import (
    DeltaSource,
    GraphTopology,
    NonPositiveDelta,
    PairwiseModel,
    PotentialVector,
    PottsConfig,
    ZeroGap,
    bounds_report,
    compute_S,
    compute_S0,
    corollary_radii,
    delta_integral_gap,
    eta_threshold_general,
    eta_threshold_order_m,
    grid_graph,
    iteration_bounds,
    potts_model,
    thresholds_L2,
)


def _single_edge(vertex, edge) -> PairwiseModel:
    topology = GraphTopology.from_edges(2, 2, [(0, 1)])
    return PairwiseModel.create(
        topology, PotentialVector.from_arrays(vertex, [edge])
    )


def test_S_of_zero_costs() -> None:
    topology = grid_graph(2, 3)
    model = PairwiseModel.create(topology, PotentialVector.zeros(topology))

    expected = topology.num_edges * math.log(9) + topology.n * math.log(3)
    assert compute_S(model, 10.0) == pytest.approx(expected)


def test_S_single_edge_hand_arithmetic() -> None:
    model = _single_edge(np.zeros((2, 2)), [[0.0, 1.0], [1.0, 0.0]])

    expected = math.log(2 + 2 * math.exp(-1)) + 0.5 + 2 * math.log(2)
    assert compute_S(model, 1.0) == pytest.approx(expected, rel=1e-12)


def test_S_is_nonnegative_and_bounds_S0() -> None:
    for seed in range(5):
        model = potts_model(grid_graph(3, 3), PottsConfig(seed=seed))
        for eta in (1.0, 50.0, 700.0):
            s = compute_S(model, eta)
            assert s >= 0.0
            assert compute_S0(model, eta) <= s


def test_iteration_bounds_arithmetic() -> None:
    assert iteration_bounds(1.0, 0.1, 2) == (1200, 400)
    assert iteration_bounds(1.0, 0.05, 2) == (4800, 1600)
    assert iteration_bounds(0.0, 0.1, 4) == (0, 0)
    with pytest.raises(ValueError, match="epsilon"):
        iteration_bounds(1.0, 0.0, 2)


def test_eta_threshold_general() -> None:
    assert eta_threshold_general(1.0, 0.0, 1.0) == pytest.approx(
        2 * math.log(64) + 2
    )
    assert eta_threshold_general(5.0, 3.0, 2.0) == pytest.approx(
        eta_threshold_general(5.0, 3.0, 1.0) / 2
    )
    with pytest.raises(NonPositiveDelta):
        eta_threshold_general(1.0, 0.0, 0.0)


def test_eta_threshold_order_m_formula() -> None:
    n, d, m = 4, 3, 2
    expected = (math.log(8 * m * n**m * d**m) + 2 * m * n**m * d**m) / 0.25
    assert eta_threshold_order_m(n, d, m, 0.25) == pytest.approx(expected)


def test_corollary_radii() -> None:
    r1, rh = corollary_radii(4, 2, 4)
    assert r1 == 4 * 2 + 4 * 4
    assert rh == pytest.approx(4 * math.log(2) + 4 * math.log(4))


def test_thresholds_L2() -> None:
    eta_min, _ = thresholds_L2(4, 2, 4, 2, 0.5, 1.0, 1.0)
    assert eta_min == pytest.approx(128 * (2 * math.log(1024) + 256))

    # Below the cost floor the epsilon threshold does not move; above it shrinks.
    _, eps_low = thresholds_L2(4, 2, 4, 2, 0.5, 1.0, 10.0)
    _, eps_floor = thresholds_L2(4, 2, 4, 2, 0.5, 1.0, 68.0)
    _, eps_high = thresholds_L2(4, 2, 4, 2, 0.5, 1.0, 700.0)
    assert eps_low == eps_floor
    assert eps_high < eps_floor


def test_delta_integral_gap() -> None:
    model = _single_edge(np.zeros((2, 2)), [[0.0, 1.0], [1.0, 1.0]])
    assert delta_integral_gap(model) == pytest.approx(1.0)

    scaled = PairwiseModel.create(model.topology, model.costs.scaled(3.0))
    assert delta_integral_gap(scaled) == pytest.approx(3.0)

    zero = _single_edge(np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(ZeroGap):
        delta_integral_gap(zero)


def test_bounds_report_delta_provenance() -> None:
    model = _single_edge(np.zeros((2, 2)), [[0.0, 1.0], [1.0, 1.0]])
    oracle = bounds_report(model, 5.0, 0.1)
    assert oracle.delta_source is DeltaSource.ORACLE_INTEGRAL_GAP
    assert oracle.delta_used == pytest.approx(1.0)
    report = bounds_report(model, 5.0, 0.1, delta=0.25)
    assert report.delta_source is DeltaSource.USER
    assert report.delta_used == 0.25

    zero = _single_edge(np.zeros((2, 2)), np.zeros((2, 2)))
    fallback = bounds_report(zero, 5.0, 0.1)
    assert fallback.delta_source is DeltaSource.INTEGRAL_COST_LOWER_BOUND
    assert fallback.delta_used == 0.5

    # 3^25 assignments is over the enumeration guard.
    big = potts_model(grid_graph(5, 3), PottsConfig(seed=0))
    assert bounds_report(big, 5.0, 0.1).delta_source is (
        DeltaSource.INTEGRAL_COST_LOWER_BOUND
    )


def test_bounds_report_json() -> None:
    model = potts_model(grid_graph(2, 2), PottsConfig(d=2, seed=1))
    report = bounds_report(model, 10.0, 0.01)
    payload = report.to_json_dict()

    assert payload["delta_source"] in {s.value for s in DeltaSource}
    assert "radii_formula" in payload
    assert payload["S0"] <= payload["S"]
    cyclic, greedy = iteration_bounds(report.S0, 0.01, 2)
    assert (payload["iteration_bound_cyclic"], payload["iteration_bound_greedy"]) == (
        cyclic,
        greedy,
    )
    with pytest.raises(NonPositiveDelta):
        bounds_report(model, 10.0, 0.01, delta=-1.0)
