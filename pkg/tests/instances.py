"""Random model generators shared by the test modules.

AR polynomials are built as products ``P(z) = prod_i (Id - A_i z)`` so the
companion spectrum is exactly the union of the spectra of the ``A_i``.
"""
import numpy as np

from armastat.armapq import ArmapqModel
from armastat.mpoly import MatrixPoly
from armastat.noise import NoiseModel


def matrix_with_spectrum(rng, eigs):
    m = len(eigs)
    T = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    T += 2.0 * np.eye(m)  # keep T comfortably invertible
    return T @ np.diag(eigs) @ np.linalg.inv(T)


def psis_from_factors(factors):
    m = factors[0].shape[0]
    P = MatrixPoly(np.eye(m, dtype=complex))
    for A in factors:
        P = P @ MatrixPoly(np.stack([np.eye(m, dtype=complex), -A]))
    return [-P[k] for k in range(1, len(factors) + 1)]


def random_eigs(rng, m, lo, hi):
    r = rng.uniform(lo, hi, m)
    return r * np.exp(2j * np.pi * rng.uniform(size=m))


def random_thetas(rng, m, d, q):
    return [rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d)) for _ in range(q + 1)]


def causal_model(rng, radius=0.95, m=None, d=None, p=None, q=None):
    m = m or int(rng.integers(1, 4))
    d = d or int(rng.integers(1, 4))
    p = p or int(rng.integers(1, 4))
    q = int(rng.integers(0, 4)) if q is None else q
    factors = [matrix_with_spectrum(rng, random_eigs(rng, m, 0.05, radius)) for _ in range(p)]
    return ArmapqModel(psis_from_factors(factors), random_thetas(rng, m, d, q), NoiseModel.gaussian(d))


def split_model(rng, gap=0.05, m=None, d=None, p=None, q=None, noise=None):
    """Eigenvalues on both sides of the unit circle, none within ``gap`` of it."""
    m = m or int(rng.integers(1, 3))
    d = d or int(rng.integers(1, 3))
    p = p or int(rng.integers(1, 3))
    q = int(rng.integers(0, 3)) if q is None else q
    if m * p < 2:
        p = 2
    inside = random_eigs(rng, m * p, 0.1, 1.0 - 2 * gap)
    outside = random_eigs(rng, m * p, 1.0 + 2 * gap, 2.5)
    pick = rng.integers(0, 2, m * p).astype(bool)
    pick[0], pick[-1] = False, True  # both sides of the circle occupied
    eigs = np.where(pick, inside, outside).reshape(p, m)
    factors = [matrix_with_spectrum(rng, e) for e in eigs]
    return ArmapqModel(psis_from_factors(factors), random_thetas(rng, m, d, q), noise or NoiseModel.gaussian(d))


def unit_cancel_model():
    """Identity AR part with an MA part whose cancellation fails off the diagonal."""
    return ArmapqModel([np.eye(2)], [np.eye(2), np.array([[-1.0, 0.0], [1.0, -1.0]])], NoiseModel.gaussian(2))


def heavy_mix_model(heavy_both=False):
    from armastat.noise import Component

    thetas = [np.eye(2), np.array([[-1.0, -1.0], [1.0, -4.0]])]
    if heavy_both:
        noise = NoiseModel(np.eye(2), None, [Component("log_cauchy"), Component("log_cauchy")])
    else:
        noise = NoiseModel(np.array([[1.0, 0.0], [1.0, 1.0]]), None, [Component("log_cauchy"), Component("gaussian")])
    return ArmapqModel([np.diag([2.0, 3.0])], thetas, noise)
