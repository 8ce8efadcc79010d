"""Simulation of truncated solution series and residual checks against the recursion."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .noise import mix, sample_components
from .report import SeriesSolution


@dataclass(frozen=True)
class SimConfig:
    T: int = 1000
    J: int = 200
    burn_guard: int = 10
    seed: int = 0

    def validate(self, p: int, q: int) -> "SimConfig":
        if self.T <= 0:
            raise ValueError("horizon T must be positive")
        if self.J <= p + q:
            raise ValueError(f"truncation J={self.J} must exceed p + q = {p + q}")
        if self.burn_guard < p + q:
            raise ValueError(f"burn_guard={self.burn_guard} must be at least p + q = {p + q}")
        if self.burn_guard >= self.T:
            raise ValueError("burn_guard leaves no interior time points")
        return self


def recursion_of(model) -> tuple[list, list]:
    """(Psis, Thetas) of an ARMA(1,q) or ARMA(p,q) model."""
    if hasattr(model, "Psis"):
        return model.Psis, model.Thetas
    return [model.Psi1], model.Thetas


def _component_coeffs(coeffs: np.ndarray, model, tol: float) -> np.ndarray:
    """``D_j = C_j L`` with heavy columns set to exactly zero where they are negligible.

    Entries below ``tol`` times the column's largest value over the window are
    zero in exact arithmetic; left at rounding level they would multiply
    heavy-tailed draws and swamp the path.
    """
    D = coeffs @ model.noise.L
    for i in model.noise.heavy:
        col = D[:, :, i]
        col[np.abs(col) <= tol * np.max(np.abs(col), initial=0.0)] = 0.0
    return D


def simulate_path(model, solution: SeriesSolution, cfg: SimConfig, tol: float = 1e-9):
    """Paths ``Y_t`` (T, m) and ``Z_t`` (T, d) for t = 0..T-1.

    ``Y_t = constant + sum_{|j| <= J} C_j Z_{t-j}``; the noise is drawn once over
    ``[-J, T-1+J]`` so anticausal terms see the same future samples as the
    returned ``Z`` path.  The sum is evaluated on the independent components
    ``V`` (``Z = L V + c``) so that exact cancellations of heavy components
    survive floating point.
    """
    Psis, Thetas = recursion_of(model)
    cfg.validate(len(Psis), len(Thetas) - 1)
    sol = solution.truncated(cfg.J)
    T, J = cfg.T, cfg.J
    noise = model.noise
    V = sample_components(noise, T + 2 * J, cfg.seed)
    D = _component_coeffs(sol.coeffs, model, tol)
    # the mean of Z enters through the full (untruncated) gain when it is known
    gain = sol.gain if sol.gain is not None else sol.coeffs.sum(axis=0)
    shift = np.asarray(sol.constant, dtype=complex) + gain @ noise.c
    Y = np.tile(shift, (T, 1))
    with np.errstate(invalid="ignore", over="ignore"):
        for j in range(sol.jmin, sol.jmax + 1):
            Dj = D[j - sol.jmin]
            cols = np.nonzero(np.any(Dj != 0, axis=0))[0]
            if cols.size == 0:
                continue
            start = J - j
            Y += V[start : start + T, cols] @ Dj[:, cols].T
    return Y, mix(noise, V[J : J + T])


def residual_check(model, Y, Z, cfg: SimConfig, relative: bool = False) -> float:
    """``max_t |Y_t - sum_k Psi_k Y_{t-k} - sum_k Theta_k Z_{t-k}|`` over ``t >= burn_guard``.

    With ``relative=True`` each residual is divided by ``1 +`` the sum of the
    magnitudes of the terms, which keeps heavy-tailed paths meaningful.  Time
    points touching non-finite samples (overflowed heavy draws) are skipped.
    """
    Psis, Thetas = recursion_of(model)
    Y = np.asarray(Y, dtype=complex)
    Z = np.asarray(Z, dtype=complex)
    if Y.shape[0] != Z.shape[0]:
        raise ValueError("Y and Z paths are not aligned")
    T, g = Y.shape[0], cfg.burn_guard
    if g < len(Psis) + len(Thetas) - 1 or g >= T:
        raise ValueError("burn_guard must cover p + q and leave interior points")
    with np.errstate(invalid="ignore", over="ignore"):
        r = Y[g:].copy()
        size = np.linalg.norm(Y[g:], axis=1)
        for k, X in enumerate(Psis, start=1):
            term = Y[g - k : T - k] @ X.T
            r -= term
            size += np.linalg.norm(term, axis=1)
        for k, Th in enumerate(Thetas):
            term = Z[g - k : T - k] @ Th.T
            r -= term
            size += np.linalg.norm(term, axis=1)
        err = np.linalg.norm(r, axis=1)
        if relative:
            err = err / (1.0 + size)
    err = err[np.isfinite(err) & np.isfinite(size)]
    return float(np.max(err, initial=0.0))


def autocov_empirical(Y, max_lag: int) -> np.ndarray:
    """Biased estimator ``gamma(h) = T^{-1} sum_t (Y_{t+h} - mean)(Y_t - mean)^*``, h = 0..max_lag."""
    Y = np.asarray(Y, dtype=complex)
    if Y.ndim == 1:
        Y = Y[:, None]
    T = Y.shape[0]
    if max_lag >= T:
        raise ValueError("max_lag must be smaller than the path length")
    X = Y - Y.mean(axis=0)
    return np.stack([X[h:].T @ X[: T - h].conj() / T for h in range(max_lag + 1)])
