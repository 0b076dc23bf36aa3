"""Tests for the closed-form projections and their dual bookkeeping."""

from __future__ import annotations

import math

import numpy as np
import pytest

from emp_inference.core import (
    GraphTopology,
    MarginalVector,
    PottsConfig,
    ZeroMass,
    grid_graph,
    hellinger_sq,
    local_lyapunov,
    new_dual_state,
    normalize_left,
    normalize_right,
    potts_model,
    project_left_consistency,
    project_right_consistency,
)
from emp_inference.solver import initialize, lyapunov_parts


def _edge_state(joint, vertex_i, vertex_j):
    joint = np.asarray(joint, dtype=float)
    topology = GraphTopology.from_edges(2, joint.shape[0], [(0, 1)])
    gamma = MarginalVector.from_linear(topology, [vertex_i, vertex_j], [joint])
    return gamma, new_dual_state(topology)


def test_uniform_state_is_a_fixed_point() -> None:
    topology = GraphTopology.from_edges(2, 3, [(0, 1)])
    for project in (
        project_left_consistency,
        project_right_consistency,
        normalize_left,
        normalize_right,
    ):
        gamma = MarginalVector.uniform(topology)
        gain = project(gamma, new_dual_state(topology), 0)

        assert gain == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(gamma.edge_marginals(), 1.0 / 9.0, rtol=1e-14)
        np.testing.assert_allclose(gamma.vertex_marginals(), 1.0 / 3.0, rtol=1e-14)


def test_left_consistency_matches_hand_evaluation() -> None:
    gamma, dual = _edge_state([[0.4, 0.2], [0.1, 0.3]], [0.5, 0.5], [0.5, 0.5])

    project_left_consistency(gamma, dual, 0)

    vertex = gamma.vertex_marginals()[0]
    joint = gamma.edge_marginals()[0]
    np.testing.assert_allclose(vertex, [math.sqrt(0.3), math.sqrt(0.2)], rtol=1e-12)
    np.testing.assert_allclose(
        joint[0], np.array([0.4, 0.2]) * math.sqrt(0.5 / 0.6), rtol=1e-12
    )
    np.testing.assert_allclose(
        joint[1], np.array([0.1, 0.3]) * math.sqrt(0.5 / 0.4), rtol=1e-12
    )
    np.testing.assert_allclose(joint.sum(axis=1), vertex, atol=1e-12)
    np.testing.assert_allclose(
        dual.lambda_row[0], 0.5 * np.log([0.6 / 0.5, 0.4 / 0.5]), rtol=1e-12
    )


def test_consistency_gain_is_twice_hellinger() -> None:
    rng = np.random.default_rng(0)
    for _ in range(20):
        joint = rng.dirichlet(np.ones(16)).reshape(4, 4)
        vertex = rng.dirichlet(np.ones(4))
        gamma, dual = _edge_state(joint, vertex, np.full(4, 0.25))

        gain = project_left_consistency(gamma, dual, 0)

        assert gain == pytest.approx(
            2.0 * hellinger_sq(joint.sum(axis=1), vertex), rel=1e-10, abs=1e-15
        )
        assert gain >= 0.0


def test_right_consistency_mirrors_left_under_transposition() -> None:
    rng = np.random.default_rng(1)
    joint = rng.dirichlet(np.ones(9)).reshape(3, 3)
    vertex = rng.dirichlet(np.ones(3))
    other = np.full(3, 1.0 / 3.0)

    left, left_dual = _edge_state(joint, vertex, other)
    right, right_dual = _edge_state(joint.T, other, vertex)
    left_gain = project_left_consistency(left, left_dual, 0)
    right_gain = project_right_consistency(right, right_dual, 0)

    assert right_gain == pytest.approx(left_gain, rel=1e-12)
    np.testing.assert_allclose(
        right.edge_marginals()[0], left.edge_marginals()[0].T, rtol=1e-12
    )
    np.testing.assert_allclose(
        right.vertex_marginals()[1], left.vertex_marginals()[0], rtol=1e-12
    )
    np.testing.assert_allclose(
        right.edge_marginals()[0].sum(axis=0), right.vertex_marginals()[1], atol=1e-12
    )


def test_normalize_left_hand_arithmetic() -> None:
    joint = np.array([[0.3, 0.2], [0.1, 0.3]])
    gamma, dual = _edge_state(joint, [1.0, 1.0], [0.5, 0.5])

    gain = normalize_left(gamma, dual, 0)

    np.testing.assert_allclose(gamma.vertex_marginals()[0], [0.5, 0.5], rtol=1e-14)
    np.testing.assert_allclose(gamma.edge_marginals()[0], joint / 0.9, rtol=1e-14)
    assert dual.xi_edge[0] == pytest.approx(math.log(0.9))
    assert dual.xi_vertex[0] == pytest.approx(math.log(2.0))
    assert gain >= 0.0
    # The other vertex is untouched.
    np.testing.assert_allclose(gamma.vertex_marginals()[1], [0.5, 0.5], rtol=1e-14)


def test_normalize_right_keeps_ratios() -> None:
    joint = np.array([[0.2, 0.4], [0.6, 0.3]])
    gamma, dual = _edge_state(joint, [0.5, 0.5], [0.3, 0.9])

    normalize_right(gamma, dual, 0)

    np.testing.assert_allclose(gamma.vertex_marginals()[1], [0.25, 0.75], rtol=1e-14)
    np.testing.assert_allclose(
        gamma.edge_marginals()[0], joint / joint.sum(), rtol=1e-14
    )
    assert dual.xi_vertex[1] == pytest.approx(math.log(1.2))


def test_zero_mass_is_an_error() -> None:
    gamma, dual = _edge_state([[0.25, 0.25], [0.25, 0.25]], [1.0, 0.0], [0.5, 0.5])
    with pytest.raises(ZeroMass, match="left consistency"):
        project_left_consistency(gamma, dual, 0)


def test_hellinger_examples() -> None:
    p = np.array([0.2, 0.8])
    assert hellinger_sq(p, p) == 0.0
    assert hellinger_sq(np.array([1.0, 0.0]), np.array([0.5, 0.5])) == pytest.approx(
        1.0 - math.sqrt(2.0) / 2.0
    )


def test_hellinger_inequality_on_random_pairs() -> None:
    rng = np.random.default_rng(7)
    for _ in range(200):
        d = int(rng.integers(2, 6))
        p = rng.dirichlet(np.ones(d))
        q = rng.dirichlet(np.ones(d))
        assert 0.25 * np.abs(p - q).sum() ** 2 <= 2.0 * hellinger_sq(p, q) + 1e-15


def test_local_lyapunov_measures_each_projection_exactly() -> None:
    model = potts_model(grid_graph(3), PottsConfig(seed=2))
    eta = 10.0
    gamma, dual = initialize(model, eta)
    projections = (
        (project_left_consistency, 0),
        (normalize_left, 0),
        (project_right_consistency, 1),
        (normalize_right, 1),
    )
    rng = np.random.default_rng(11)

    for _ in range(200):
        edge = int(rng.integers(model.topology.num_edges))
        project, end = projections[int(rng.integers(4))]
        vertex = model.topology.edges[edge][end]
        local = local_lyapunov(model, dual, eta, edge, vertex)
        _, full = lyapunov_parts(dual, model, eta)

        gain = project(gamma, dual, edge)

        measured = local_lyapunov(model, dual, eta, edge, vertex) - local
        _, full_after = lyapunov_parts(dual, model, eta)
        assert measured == pytest.approx(full_after - full, abs=1e-9)
        assert measured == pytest.approx(gain, abs=1e-9)
