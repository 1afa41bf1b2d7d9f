import math

import numpy as np
import pytest

import lcsync


def complete(m):
    return np.ones((m, m)) - np.eye(m)


def test_rossler_field():
    np.testing.assert_allclose(lcsync.rossler_eval(np.zeros(3)), [0.0, 0.0, 0.2])
    np.testing.assert_allclose(lcsync.rossler_eval(np.ones(3)), [-2.0, 1.165, -8.8])
    jac = lcsync.rossler_jacobian(np.zeros(3))
    np.testing.assert_array_equal(jac, [[0, -1, -1], [1, 0.165, 0], [0, 0, -10]])
    fd = lcsync.finite_difference_jacobian(np.array([0.3, -1.0, 2.0]))
    np.testing.assert_allclose(fd, lcsync.rossler_jacobian(np.array([0.3, -1.0, 2.0])), atol=1e-6)


def test_laplacian_and_schedules():
    lap = lcsync.laplacian_from_adjacency(complete(3))
    np.testing.assert_array_equal(lap, [[-2, 1, 1], [1, -2, 1], [1, 1, -2]])
    with pytest.raises(ValueError):
        lcsync.laplacian_from_adjacency(-complete(3))

    s = lcsync.blinking_schedule(lcsync.BlinkingParams(m=50, k=3, p=0.04, tau=1.0, seed=5), 20.0)
    assert s.nodes == 50
    assert len(s.pieces) == 20
    ring = lcsync.laplacian_from_adjacency(lcsync.ring_adjacency(50, 3))
    for piece in s.pieces:
        assert np.all(piece[ring > 0] == 1.0)
        np.testing.assert_array_equal(piece, piece.T)


def test_graph_tools():
    path = np.zeros((3, 3), dtype=bool)
    path[1, 0] = path[2, 1] = True
    assert lcsync.has_spanning_tree(path) == (True, 0)
    v = np.array([[0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.2, 0.3, 0.5]])
    assert lcsync.hajnal_diameter_matrix(v, 3) == pytest.approx(0.6)
    assert lcsync.scrambling_coefficient(np.array([[0.8, 0.2], [0.3, 0.7]])) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        lcsync.scrambling_coefficient(np.array([[0.5, 0.5], [0.9, 0.3]]))


def test_heat_flow_and_fundamental_matrix():
    s = lcsync.CouplingSchedule.constant(np.array([[-1.0, 1.0], [1.0, -1.0]]), 0.0, 1.0)
    times, states = lcsync.integrate_network(s, 1.0, np.array([1.0, 0.0]), 0.0, 1.0, 0.01, field="zero")
    assert times[-1] == 1.0
    assert states[-1, 0] == pytest.approx(0.5 + 0.5 * math.exp(-2.0), abs=1e-8)
    v = lcsync.fundamental_matrix(s, 1.0, 0.0, 1.0)
    np.testing.assert_allclose(v.sum(axis=1), 1.0, atol=1e-12)


def test_spectral_quantities():
    s = lcsync.CouplingSchedule.constant(lcsync.laplacian_from_adjacency(complete(3)), 0.0, 200.0)
    assert lcsync.transverse_exponent(s, 1.0, 200.0) == pytest.approx(-3.0, abs=1e-3)
    est, samples = lcsync.hajnal_diameter_linear(s, 1.0, 100.0, [0.0, 50.0])
    assert est == pytest.approx(math.exp(-3.0), rel=0.02)
    assert len(samples) == 2
    P, P1, P2 = lcsync.projection_basis(4, 2)
    np.testing.assert_allclose(P.T @ P, np.eye(8), atol=1e-12)
    assert lcsync.sync_criterion(0.09, -0.3) == (pytest.approx(-0.21), True)
    assert lcsync.sync_criterion(0.0, 0.0) == (0.0, False)


def test_floquet():
    star0 = np.zeros((3, 3))
    star0[1:, 0] = 1.0
    star1 = np.zeros((3, 3))
    star1[[0, 2], 1] = 1.0
    s = lcsync.CouplingSchedule(
        [0.0, 1.0, 2.0],
        [lcsync.laplacian_from_adjacency(star0), lcsync.laplacian_from_adjacency(star1)],
        periodic=True,
    )
    multipliers, per_period, rate = lcsync.floquet_multipliers(s, 1.0)
    assert abs(multipliers[0] - 1.0) < 1e-8
    assert per_period < 1.0
    assert rate == pytest.approx(per_period ** 0.5)


def test_config_driven_runs():
    config = {
        "seed": 4,
        "schedule": {"type": "blinking", "m": 10, "k": 2, "p": 0.1, "tau": 1},
        "sigma": 1.5,
        "horizon": 40,
        "T": 30,
        "R": 10,
        "spectrum": {"mu_samples": 1, "mu_t_total": 200, "varsigma_t_total": 200, "compute_diameter": False},
    }
    summary = lcsync.simulate(config)
    assert summary["observed_synchronized"]
    assert summary["spectrum"]["H"] == pytest.approx(summary["spectrum"]["mu"] + summary["spectrum"]["varsigma"])

    config.pop("sigma")
    config["sigma_grid"] = [0.0, 1.5]
    rows = lcsync.sweep(config)
    assert [r["sigma"] for r in rows] == [0.0, 1.5]
    assert not rows[0]["observed"] and rows[1]["observed"]

    config["sigma_grid"] = [0.5]
    config["bogus"] = 1
    with pytest.raises(ValueError, match="bogus"):
        lcsync.sweep(config)
