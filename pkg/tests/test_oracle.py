"""Tests for the brute-force MAP and KL-projection oracles."""

from __future__ import annotations

import math

import numpy as np
import pytest

from emp_inference.core import (
    Assignment,
    GraphTopology,
    MarginalVector,
    NonPositiveInput,
    PairwiseModel,
    PotentialVector,
    PottsConfig,
    Side,
    TooLarge,
    brute_force_map,
    grid_graph,
    integral_marginals,
    kl_projection_oracle,
    linear_objective,
    new_dual_state,
    potts_model,
    project_left_consistency,
    project_right_consistency,
)


def test_zero_costs_are_fully_degenerate() -> None:
    topology = GraphTopology.from_edges(2, 3, [(0, 1)])
    result = brute_force_map(
        PairwiseModel.create(topology, PotentialVector.zeros(topology))
    )

    assert result.unique is False
    assert result.count_optimal == 9
    assert result.best == Assignment.of([0, 0])
    assert result.second_value == result.best_value == 0.0


def test_separable_objective() -> None:
    topology = GraphTopology.from_edges(2, 2, [(0, 1)])
    # theta_i = [1, 0] on both vertices, so C_i = [-1, 0].
    costs = PotentialVector.from_arrays([[-1.0, 0.0], [-1.0, 0.0]], np.zeros((1, 2, 2)))
    result = brute_force_map(PairwiseModel.create(topology, costs))

    assert result.best == Assignment.of([0, 0])
    assert result.best_value == pytest.approx(2.0)
    assert result.second_value == pytest.approx(1.0)
    assert result.unique


def test_enumeration_matches_lp_objective_on_grid() -> None:
    model = potts_model(grid_graph(3, 3), PottsConfig(seed=4))
    result = brute_force_map(model)

    vertex, edge = integral_marginals(model, result.best)
    assert result.best_value == pytest.approx(
        linear_objective(model, vertex, edge), abs=1e-12
    )
    assert result.best_value >= result.second_value


def test_chunking_does_not_change_the_result() -> None:
    model = potts_model(grid_graph(2, 3), PottsConfig(seed=9))
    whole = brute_force_map(model)
    chunked = brute_force_map(model, chunk=7)

    assert chunked.best == whole.best
    assert chunked.count_optimal == whole.count_optimal
    assert chunked.best_value == pytest.approx(whole.best_value, abs=1e-12)
    assert chunked.second_value == pytest.approx(whole.second_value, abs=1e-12)


def test_enumeration_guard() -> None:
    model = potts_model(grid_graph(2, 3), PottsConfig(seed=0))
    with pytest.raises(TooLarge, match="3\\^4"):
        brute_force_map(model, limit=80)


def test_kl_oracle_fixed_point() -> None:
    p = np.array([0.2, 0.3, 0.5])
    q = np.array([0.6, 0.3, 0.1])
    joint = np.outer(p, q)

    projected, vertex = kl_projection_oracle(joint, p, Side.ROW)

    np.testing.assert_allclose(projected, joint, rtol=1e-7)
    np.testing.assert_allclose(vertex, p, rtol=1e-7)


def test_kl_oracle_hand_example() -> None:
    joint = np.array([[0.4, 0.2], [0.1, 0.3]])
    projected, vertex = kl_projection_oracle(joint, np.array([0.5, 0.5]), Side.ROW)

    alpha = 0.5 * math.log(0.6 / 0.5)
    assert alpha == pytest.approx(0.09116, abs=1e-5)
    assert vertex[0] == pytest.approx(0.5 * math.exp(alpha), abs=1e-7)
    np.testing.assert_allclose(projected.sum(axis=1), vertex, atol=1e-7)


@pytest.mark.parametrize("side", [Side.ROW, Side.COL])
def test_kl_oracle_matches_closed_form(side: Side) -> None:
    rng = np.random.default_rng(12)
    for _ in range(25):
        d = int(rng.integers(2, 6))
        joint = rng.dirichlet(np.ones(d * d)).reshape(d, d)
        vertex = rng.dirichlet(np.ones(d))
        other = np.full(d, 1.0 / d)
        vertices = [vertex, other] if side is Side.ROW else [other, vertex]
        topology = GraphTopology.from_edges(2, d, [(0, 1)])
        gamma = MarginalVector.from_linear(topology, vertices, [joint])
        if side is Side.ROW:
            project_left_consistency(gamma, new_dual_state(topology), 0)
        else:
            project_right_consistency(gamma, new_dual_state(topology), 0)

        projected, projected_vertex = kl_projection_oracle(joint, vertex, side)

        v = 0 if side is Side.ROW else 1
        np.testing.assert_allclose(projected, gamma.edge_marginals()[0], atol=1e-6)
        np.testing.assert_allclose(
            projected_vertex, gamma.vertex_marginals()[v], atol=1e-6
        )


def test_kl_oracle_rejects_non_positive_input() -> None:
    with pytest.raises(NonPositiveInput, match="gamma_edge"):
        kl_projection_oracle(np.array([[0.5, 0.0], [0.25, 0.25]]), np.ones(2), Side.ROW)
    with pytest.raises(NonPositiveInput, match="gamma_vertex"):
        kl_projection_oracle(np.full((2, 2), 0.25), np.array([1.0, np.nan]), Side.COL)
