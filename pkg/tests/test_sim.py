import numpy as np
import pytest
from numpy.testing import assert_allclose

from armastat.arma1q import Arma1qModel, solution_coeffs_1q
from armastat.armapq import ArmapqModel, check_existence_pq
from armastat.noise import Component, NoiseModel, sample
from armastat.report import SeriesSolution
from armastat.sim import SimConfig, autocov_empirical, residual_check, simulate_path

from instances import causal_model, psis_from_factors, heavy_mix_model


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(T=100, J=2, burn_guard=5).validate(1, 1)
    with pytest.raises(ValueError):
        SimConfig(T=100, J=50, burn_guard=1).validate(1, 1)
    with pytest.raises(ValueError):
        SimConfig(T=5, J=50, burn_guard=5).validate(1, 1)


def test_zero_series_gives_constant_path():
    model = ArmapqModel([[[0.5]]], [[[1.0]]], NoiseModel.gaussian(1))
    sol = SeriesSolution(np.array([4.0 + 1.0j]), 0, np.zeros((1, 1, 1), dtype=complex), exact=True)
    Y, _ = simulate_path(model, sol, SimConfig(T=50, J=10, burn_guard=2))
    assert np.all(Y == 4.0 + 1.0j)


def test_deterministic_noise_path_is_constant():
    model = ArmapqModel([np.diag([0.5, 0.25])], [np.eye(2)], NoiseModel(np.zeros((2, 1)), [1.0, 2.0]))
    r = check_existence_pq(model)
    Y, Z = simulate_path(model, r.solution, SimConfig(T=30, J=10, burn_guard=2))
    assert_allclose(Y, np.tile([2.0, 2.0 / 0.75], (30, 1)), atol=1e-12)


def test_causal_ar1_matches_direct_recursion():
    model = Arma1qModel([[0.5]], [[[1.0]]], NoiseModel.gaussian(1))
    cfg = SimConfig(T=200, J=60, burn_guard=1, seed=3)
    Y, _ = simulate_path(model, solution_coeffs_1q(model, J=60), cfg)
    Z = sample(model.noise, cfg.T + 2 * cfg.J, cfg.seed)[:, 0]
    x = 0.0
    direct = []
    for t in range(cfg.T + cfg.J):
        x = 0.5 * x + Z[t]
        direct.append(x)
    # the recursion started at zero 2J steps back, so it agrees to about 0.5**J
    assert np.max(np.abs(Y[:, 0] - np.array(direct[cfg.J:]))) < 1e-12


def test_anticausal_residual():
    model = Arma1qModel([[2.0]], [[[1.0]], [[0.4]]], NoiseModel.gaussian(1))
    cfg = SimConfig(T=300, J=200, burn_guard=2, seed=0)
    Y, Z = simulate_path(model, solution_coeffs_1q(model, J=200), cfg)
    assert residual_check(model, Y, Z, cfg) < 1e-6


def test_finite_ma_residual():
    model = ArmapqModel([np.zeros((2, 2))], [np.eye(2), np.ones((2, 2))], NoiseModel.gaussian(2))
    r = check_existence_pq(model)
    cfg = SimConfig(T=200, J=50, burn_guard=2)
    Y, Z = simulate_path(model, r.solution, cfg)
    assert residual_check(model, Y, Z, cfg) < 1e-12


def test_arma21_residual():
    model = causal_model(np.random.default_rng(11), m=2, d=2, p=2, q=1, radius=0.9)
    r = check_existence_pq(model)
    cfg = SimConfig(T=500, J=200, burn_guard=3)
    Y, Z = simulate_path(model, r.solution, cfg)
    assert residual_check(model, Y, Z, cfg) < 1e-6


def test_unit_root_pass_residual():
    thetas = [np.eye(2), np.ones((2, 2)), -np.eye(2) - np.ones((2, 2))]
    model = Arma1qModel(np.eye(2), thetas, NoiseModel(np.eye(2), [0.5, 0.0]))
    cfg = SimConfig(T=300, J=200, burn_guard=3)
    sol = solution_coeffs_1q(model, J=200)
    assert sol.exact
    Y, Z = simulate_path(model, sol, cfg)
    assert residual_check(model, Y, Z, cfg) < 1e-10


def test_heavy_path_relative_residual():
    model = heavy_mix_model()
    r = check_existence_pq(model)
    cfg = SimConfig(T=300, J=200, burn_guard=2, seed=5)
    Y, Z = simulate_path(model, r.solution, cfg)
    assert residual_check(model, Y, Z, cfg, relative=True) < 1e-10


def test_seed_reproducibility():
    model = causal_model(np.random.default_rng(2), m=2, d=2, p=1, q=1)
    r = check_existence_pq(model)
    cfg = SimConfig(T=100, J=50, burn_guard=2, seed=42)
    Y1, Z1 = simulate_path(model, r.solution, cfg)
    Y2, Z2 = simulate_path(model, r.solution, cfg)
    assert np.array_equal(Y1, Y2) and np.array_equal(Z1, Z2)


def test_misaligned_paths():
    model = ArmapqModel([[[0.5]]], [[[1.0]]], NoiseModel.gaussian(1))
    with pytest.raises(ValueError):
        residual_check(model, np.zeros((10, 1)), np.zeros((9, 1)), SimConfig(T=10, J=5, burn_guard=2))


def test_residual_shrinks_with_truncation():
    model = Arma1qModel([[0.9]], [[[1.0]]], NoiseModel.gaussian(1))
    res = []
    for J in (20, 40):
        cfg = SimConfig(T=200, J=J, burn_guard=2)
        Y, Z = simulate_path(model, solution_coeffs_1q(model, J=J), cfg)
        res.append(residual_check(model, Y, Z, cfg))
    assert res[1] < res[0] * 0.9**15


def test_autocov_white_noise():
    Z = sample(NoiseModel.gaussian(1), 20_000, seed=0)
    g = autocov_empirical(Z, 3)
    band = 3.0 / np.sqrt(Z.shape[0])
    assert np.all(np.abs(g[1:, 0, 0]) < band)
    assert abs(g[0, 0, 0] - 1.0) < 0.05


def test_autocov_constant_path():
    assert_allclose(autocov_empirical(np.full((50, 2), 3.0), 2), 0.0, atol=1e-14)


def test_autocov_rejects_long_lag():
    with pytest.raises(ValueError):
        autocov_empirical(np.zeros((5, 1)), 5)


def test_stationary_mean_across_halves():
    noise = NoiseModel(np.eye(1), [1.0], [Component("gaussian")])
    model = ArmapqModel(psis_from_factors([np.array([[0.6]])]), [[[1.0]], [[0.5]]], noise)
    r = check_existence_pq(model)
    cfg = SimConfig(T=20_000, J=100, burn_guard=2, seed=9)
    Y, _ = simulate_path(model, r.solution, cfg)
    a, b = Y[: cfg.T // 2, 0].real, Y[cfg.T // 2 :, 0].real
    # long-run standard error of a half-sample mean: sigma * |theta(1)| / |phi(1)| / sqrt(n)
    se = 1.5 / 0.4 / np.sqrt(cfg.T // 2)
    assert abs(a.mean() - b.mean()) < 4 * np.sqrt(2) * se


@pytest.mark.parametrize("path", ["1q", "pq"])
def test_mean_is_exact_under_truncation(path):
    noise = NoiseModel(np.eye(2), [1.0, -0.5])
    Psi, Th = np.diag([0.9, 1.5]), [np.eye(2), np.ones((2, 2))]
    if path == "1q":
        model = Arma1qModel(Psi, Th, noise)
        sol = solution_coeffs_1q(model, J=5)
    else:
        model = ArmapqModel([Psi], Th, noise)
        sol = check_existence_pq(model, window=5).solution
    expected = np.linalg.solve(np.eye(2) - Psi, (Th[0] + Th[1]) @ noise.c)
    assert_allclose(sol.constant + sol.gain @ noise.c, expected, atol=1e-12)
