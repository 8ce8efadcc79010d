import numpy as np
import pytest
from numpy.testing import assert_allclose

from armastat.armapq import build_Qtilde
from armastat.mpoly import CPoly, MatrixPoly, det_poly
from armastat.rational import (
    AliasingError,
    NotRemovableError,
    causal_coeffs,
    convolution_residual,
    is_removable,
    laurent_coeffs,
    unit_circle_singularities,
)

from instances import causal_model, unit_cancel_model, split_model


def scalar(*coeffs):
    return MatrixPoly(np.array(coeffs, dtype=complex).reshape(-1, 1, 1))


def test_no_unit_singularities():
    assert unit_circle_singularities(MatrixPoly.ar([0.5 * np.eye(2)])) == []


def test_double_unit_root():
    (z, mu), = unit_circle_singularities(MatrixPoly.ar([np.eye(2)]))
    assert mu == 2
    assert abs(z - 1) < 1e-7


def test_engineered_root_on_circle():
    z0 = np.exp(1j * np.pi / 4)
    (z, mu), = unit_circle_singularities(scalar(1.0, -1.0 / z0))
    assert mu == 1
    assert abs(z - z0) < 1e-7


def test_removable_without_unit_roots():
    P = MatrixPoly.ar([np.array([[0.5, 0.2], [0.0, -0.3]])])
    Qt = MatrixPoly(np.stack([np.eye(2), np.ones((2, 2))]))
    rem = is_removable(P, Qt)
    assert rem.removable
    for z in np.exp(2j * np.pi * np.arange(5) / 5):
        assert_allclose(rem.numerator(z) / rem.denominator(z), np.linalg.solve(P(z), Qt(z)), atol=1e-10)


def test_counterexample_not_removable():
    model = unit_cancel_model()
    rem = is_removable(model.P(), build_Qtilde(model))
    assert not rem.removable
    i, j, z0 = rem.offending
    assert (i, j) == (1, 0)
    assert abs(z0 - 1) < 1e-7


def test_scalar_cancellation():
    rem = is_removable(scalar(1.0, -1.0), scalar(3.0, -3.0))
    assert rem.removable
    assert rem.denominator.degree == 0
    assert_allclose(rem.numerator(0.3) / rem.denominator(0.3), [[3.0]], atol=1e-12)
    assert_allclose(rem.numerator[0] / rem.denominator.coeffs[0], [[3.0]], atol=1e-12)


def test_laurent_causal_scalar():
    s = laurent_coeffs(scalar(1.0, -0.5), scalar(1.0), -5, 10)
    for j in range(-5, 11):
        assert_allclose(s[j], [[0.5**j if j >= 0 else 0.0]], atol=1e-12)
    assert_allclose(s[3], [[0.125]], atol=1e-12)


def test_laurent_anticausal_scalar():
    s = laurent_coeffs(scalar(1.0, -2.0), scalar(1.0), -10, 5)
    assert_allclose(s[-1], [[-0.5]], atol=1e-12)
    for j in range(-10, 6):
        assert_allclose(s[j], [[-(2.0**j) if j <= -1 else 0.0]], atol=1e-12)


def test_laurent_identity_transfer():
    P = MatrixPoly.ar([np.array([[0.4, 0.1], [-0.2, 0.3]])])
    s = laurent_coeffs(P, P, -4, 4)
    for j in range(-4, 5):
        assert_allclose(s[j], np.eye(2) if j == 0 else np.zeros((2, 2)), atol=1e-12)


def test_laurent_rejects_non_removable():
    model = unit_cancel_model()
    with pytest.raises(NotRemovableError):
        laurent_coeffs(model.P(), build_Qtilde(model), -3, 3)


def test_laurent_root_too_close_to_circle():
    with pytest.raises(AliasingError):
        laurent_coeffs(scalar(1.0, -(1.0 - 1e-6)), scalar(1.0), 0, 10, circle_tol=1e-9)


def test_laurent_window_outside_raises():
    s = laurent_coeffs(scalar(1.0, -0.5), scalar(1.0), 0, 3)
    with pytest.raises(IndexError):
        s[4]
    assert_allclose(s.get(4), [[0.0]])


def test_causal_oracle_examples():
    s = causal_coeffs(scalar(1.0, -0.5), scalar(1.0), 6)
    assert_allclose([s[j][0, 0] for j in range(7)], 0.5 ** np.arange(7), atol=1e-14)
    assert_allclose(causal_coeffs(scalar(1.0, -0.5), scalar(2.0, 1.0), 0)[0], [[2.0]])
    Th = np.random.default_rng(0).standard_normal((3, 2, 2))
    s = causal_coeffs(MatrixPoly.identity(2), MatrixPoly(Th), 5)
    for j in range(6):
        assert_allclose(s[j], Th[j] if j < 3 else np.zeros((2, 2)), atol=0)


def test_causal_oracle_rejects_root_in_disk():
    with pytest.raises(ValueError):
        causal_coeffs(scalar(1.0, -2.0), scalar(1.0), 5)


@pytest.mark.parametrize("seed", range(10))
def test_laurent_matches_causal_oracle(seed):
    model = causal_model(np.random.default_rng(seed))
    Qt = build_Qtilde(model)
    fast = laurent_coeffs(model.P(), Qt, -5, 30)
    slow = causal_coeffs(model.P(), Qt, 30)
    for j in range(0, 31):
        assert np.max(np.abs(fast[j] - slow[j])) < 1e-9
    assert np.max(np.abs(fast.coeffs[:5])) < 1e-9


@pytest.mark.parametrize("seed", range(10))
def test_convolution_identity(seed):
    model = split_model(np.random.default_rng(100 + seed))
    Qt = build_Qtilde(model)
    s = laurent_coeffs(model.P(), Qt, -40, 40)
    assert convolution_residual(model.P(), Qt, s) < 1e-8


@pytest.mark.parametrize("seed", range(5))
def test_geometric_decay_bound(seed):
    model = split_model(np.random.default_rng(200 + seed))
    s = laurent_coeffs(model.P(), build_Qtilde(model), -60, 60)
    assert s.rho < 1
    norms = s.norms()
    tail = np.abs(s.js) >= 45
    bound = 1.1 * s.C * s.rho ** np.abs(s.js[tail]).astype(float)
    assert np.all(norms[tail] <= bound + 1e-14)


def test_determinant_ratio_passes_where_entrywise_fails():
    model = unit_cancel_model()
    Qt = build_Qtilde(model)
    dP, dQ = det_poly(model.P()), det_poly(Qt)
    assert dQ.order_at(1.0) >= dP.order_at(1.0) == 2
    assert not is_removable(model.P(), Qt).removable


def test_deterministic_under_thread_setting(monkeypatch):
    P, Q = scalar(1.0, -0.5, 0.06), scalar(1.0, 0.4)
    monkeypatch.setenv("ARMA_STATIONARITY_THREADS", "1")
    a = laurent_coeffs(P, Q, -8, 8).coeffs
    monkeypatch.setenv("ARMA_STATIONARITY_THREADS", "4")
    b = laurent_coeffs(P, Q, -8, 8).coeffs
    assert np.array_equal(a, b)


def test_cpoly_order_and_deflate():
    p = CPoly.from_roots([1.0, 1.0, 0.5])
    assert p.order_at(1.0) == 2
    assert_allclose(p.deflate(1.0, 2).coeffs, [-0.5, 1.0], atol=1e-12)
