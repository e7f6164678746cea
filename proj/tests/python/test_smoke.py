"""Smoke tests for the Python bindings: API shape, a few pinned values,
and one Monte Carlo agreement check. The heavy numerical validation lives
in the C++ suites; these only prove the bridge works."""

import math

import numpy as np
import pytest

import wishartlab as wl


def test_gindikin_membership():
    assert wl.gindikin_contains(3, 0.5)
    assert wl.gindikin_contains(3, 1.0)
    assert not wl.gindikin_contains(3, 0.75)


def test_classify_verdicts():
    bad = wl.classify(0.75, np.eye(3), np.eye(3))
    assert bad["status"] == "Invalid"
    assert bad["rule_id"] == "R3"

    good = wl.classify(1.0, np.eye(2), np.eye(2))
    assert good["status"] == "Valid"
    assert good["rule_id"] == "R1"


def test_laplace_pinned_values():
    assert wl.laplace(1.0, np.eye(2), np.eye(2), np.zeros((2, 2))) == 1.0
    # Scalar: (1 + s u)^-p exp(-u w / (1 + s u)).
    p, w, s, u = 1.3, 0.7, 2.0, 0.4
    want = (1 + s * u) ** (-p) * math.exp(-u * w / (1 + s * u))
    got = wl.laplace(p, w * np.eye(1), s * np.eye(1), u * np.eye(1))
    assert got == pytest.approx(want, rel=1e-13)


def test_mean_matches_first_moment():
    omega = np.array([[1.0, 0.5], [0.5, 2.0]])
    sigma = np.array([[2.0, 0.0], [0.0, 1.0]])
    np.testing.assert_allclose(wl.mean(1.5, omega, sigma),
                               1.5 * sigma + omega, rtol=1e-14)


def test_sampler_agrees_with_transform():
    omega = 0.3 * np.eye(2)
    sigma = np.eye(2)
    # 2p = 3.4 is not an integer, so only the Bartlett route qualifies.
    draws, method = wl.sample(1.7, omega, sigma, 20000, seed=7)
    assert method == "BartlettComposite"
    assert draws.shape == (20000, 2, 2)
    u = np.array([[0.4, 0.1], [0.1, 0.3]])
    mc, se = wl.mc_laplace(draws, u)
    lt = wl.laplace(1.7, omega, sigma, u)
    assert abs(mc - lt) < 4 * se


def test_sample_determinism():
    a, _ = wl.sample(1.0, np.zeros((2, 2)), np.eye(2), 50, seed=3)
    b, _ = wl.sample(1.0, np.zeros((2, 2)), np.eye(2), 50, seed=3)
    c, _ = wl.sample(1.0, np.zeros((2, 2)), np.eye(2), 50, seed=4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_density_central_closed_form():
    # d=2, p=1.5, sigma=2I, omega=0: density is exp(-tr(xi)/2) / (4 pi).
    xi = np.array([[1.0, 0.2], [0.2, 0.8]])
    value, terms, tail = wl.density(1.5, np.zeros((2, 2)), 2 * np.eye(2), xi)
    want = math.exp(-np.trace(xi) / 2) / (4 * math.pi)
    assert value == pytest.approx(want, rel=1e-12)
    assert terms >= 1
    assert tail <= 1e-10


def test_zonal_trace_power():
    xi = np.diag([1.0, 2.0, 3.0])
    total = wl.zonal([2], xi) + wl.zonal([1, 1], xi)
    assert total == pytest.approx(np.trace(xi) ** 2, rel=1e-12)


def test_flows_and_transition_transform():
    beta = -0.5 * np.eye(2)
    q = np.eye(2)
    x = np.eye(2)
    t = 1.0
    np.testing.assert_allclose(wl.omega_flow(beta, x, t),
                               math.exp(-1.0) * np.eye(2), rtol=1e-12)
    np.testing.assert_allclose(wl.sigma_flow(beta, q.T @ q, t),
                               2 * (1 - math.exp(-1.0)) * np.eye(2),
                               rtol=1e-12)

    u = 0.3 * np.eye(2)
    phi, psi = wl.flow_pair(2.0, beta, q, t, u)
    lt = wl.transition_laplace(2.0, beta, q, t, u, x)
    assert lt == pytest.approx(math.exp(-phi - np.trace(psi @ x)), rel=1e-13)
    assert 0.0 < lt <= 1.0


def test_transition_density_gates():
    assert wl.transition_density_exists(1.5, np.zeros((2, 2)), np.eye(2))
    assert not wl.transition_density_exists(1.5, np.zeros((2, 2)),
                                            np.zeros((2, 2)))
    assert wl.kalman_rank(1.0, np.zeros((2, 2)), np.eye(2)) == 2
    value, _, _ = wl.transition_density(1.5, np.zeros((2, 2)), np.eye(2),
                                        0.5, 0.3 * np.eye(2),
                                        1.5 * np.eye(2))
    assert value > 0.0


def test_simulate_endpoint_law():
    res = wl.simulate(2.0, -0.5 * np.eye(2), np.eye(2), np.eye(2),
                      1.0, 200, 2000, seed=11)
    assert res["endpoints"].shape == (2000, 2, 2)
    u = 0.3 * np.eye(2)
    mc, se = wl.mc_laplace(res["endpoints"], u)
    lt = wl.transition_laplace(2.0, -0.5 * np.eye(2), np.eye(2), 1.0, u,
                               np.eye(2))
    # Coarse grid: allow the Euler bias on top of the Monte Carlo band.
    assert abs(mc - lt) < 4 * se + 0.02


def test_errors_surface_as_wishart_error():
    with pytest.raises(wl.WishartError):
        wl.laplace(-1.0, np.eye(2), np.eye(2), np.zeros((2, 2)))
    with pytest.raises(wl.WishartError):
        wl.sample(0.75, np.eye(3), np.eye(3), 10, seed=1)
    with pytest.raises(wl.WishartError):
        wl.density(0.4, np.zeros((2, 2)), np.eye(2), np.eye(2))
