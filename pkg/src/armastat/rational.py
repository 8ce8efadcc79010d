"""The transfer function ``M(z) = P(z)^{-1} Qt(z)`` near the unit circle."""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .mpoly import CPoly, MatrixPoly, adjugate_poly, det_poly, roots_with_multiplicity

MAX_NODES = 2**20
MERGE_RADIUS = 1e-3


class NotRemovableError(ValueError):
    pass


class AliasingError(ArithmeticError):
    """FFT coefficients did not settle before the node cap."""


def fft_workers() -> int | None:
    raw = os.environ.get("ARMA_STATIONARITY_THREADS")
    if not raw:
        return None
    try:
        return max(1, int(raw))
    except ValueError:
        return None


def det_roots(P: MatrixPoly, tol: float = 1e-7) -> tuple[CPoly, list[tuple[complex, int]]]:
    """``det P`` and its roots with multiplicities."""
    if P.rows != P.cols:
        raise ValueError("P must be square")
    det = det_poly(P)
    if det.degree < 0:
        raise ValueError("det P(z) vanishes identically")
    return det, roots_with_multiplicity(det, tol=tol, merge_radius=MERGE_RADIUS)


def unit_circle_singularities(P: MatrixPoly, tol: float = 1e-7) -> list[tuple[complex, int]]:
    """Roots of ``det P`` with ``| |z0| - 1 | < tol``."""
    _, roots = det_roots(P)
    return [(z0, mu) for z0, mu in roots if abs(abs(z0) - 1.0) < tol]


@dataclass
class Removability:
    removable: bool
    numerator: MatrixPoly | None  # deflated Adj(P) Qt
    denominator: CPoly | None  # deflated det P
    offending: tuple[int, int, complex] | None = None  # 0-based (row, col, z0)
    singularities: list = field(default_factory=list)
    orders: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.removable


def is_removable(P: MatrixPoly, Qt: MatrixPoly, tol: float = 1e-7, zero_tol: float = 1e-9) -> Removability:
    """Entrywise order counting of ``Adj(P) Qt`` at every unit-circle root of ``det P``.

    ``tol`` is the circle band, ``zero_tol`` the relative tolerance of the
    synthetic-division remainders.
    """
    det, roots = det_roots(P)
    sing = [(z0, mu) for z0, mu in roots if abs(abs(z0) - 1.0) < tol]
    numer = adjugate_poly(P) @ Qt
    scale = numer.scale
    live = [
        (i, j)
        for i in range(numer.rows)
        for j in range(numer.cols)
        if not numer.entry(i, j).is_zero(zero_tol, scale)
    ]
    orders = {}
    for z0, mu in sing:
        for i, j in live:
            k = numer.entry(i, j).order_at(z0, zero_tol, cap=mu)
            orders[(i, j, z0)] = k
            if k < mu:
                return Removability(False, None, None, (i, j, z0), sing, orders)
    c = numer.coeffs.copy()
    if not live:
        c[:] = 0.0
    d = det
    for z0, mu in sing:
        d = d.deflate(z0, mu)
        deg = c.shape[0] - 1
        for i, j in live:
            e = CPoly(c[:, i, j]).deflate(z0, mu).coeffs
            c[:, i, j] = 0.0
            c[: min(e.size, deg + 1), i, j] = e[: deg + 1]
    keep = max(1, c.shape[0] - sum(mu for _, mu in sing))
    c = c[:keep]
    if d.coeffs[0] != 0:
        # normalise to d(0) = 1; det P(0) = 1 for every ARMA model
        c = c / d.coeffs[0]
        d = CPoly(d.coeffs / d.coeffs[0])
    numer_hat = MatrixPoly(c)
    return Removability(True, numer_hat, d, None, sing, orders)


@dataclass(frozen=True)
class LaurentSeries:
    """Coefficients ``M_j`` for ``jmin <= j <= jmax``; shape (width, rows, cols)."""

    jmin: int
    jmax: int
    coeffs: np.ndarray
    rho: float = 0.0  # geometric decay rate, max of inner and outer rates
    rho_inner: float = 0.0  # largest |root| inside the disk (governs j < 0)
    rho_outer: float = float("inf")  # smallest |root| outside the disk (governs j > 0)
    C: float = 0.0
    n_nodes: int = 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape[1:]

    @property
    def js(self) -> np.ndarray:
        return np.arange(self.jmin, self.jmax + 1)

    def __getitem__(self, j: int) -> np.ndarray:
        if not self.jmin <= j <= self.jmax:
            raise IndexError(f"lag {j} outside window [{self.jmin}, {self.jmax}]")
        return self.coeffs[j - self.jmin]

    def get(self, j: int) -> np.ndarray:
        """``M_j``, or zeros outside the window."""
        if self.jmin <= j <= self.jmax:
            return self.coeffs[j - self.jmin]
        return np.zeros(self.shape, dtype=complex)

    def norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(c, 2) if c.size else 0.0 for c in self.coeffs])

    def tail_bound(self, J: int) -> float:
        """Estimated ``sum_{|j| > J} ||M_j||`` from the fitted decay bound."""
        if self.rho <= 0.0:
            return 0.0
        if self.rho >= 1.0:
            return float("inf")
        return 2.0 * self.C * self.rho ** (J + 1) / (1.0 - self.rho)

    def right_multiply(self, A) -> "LaurentSeries":
        A = np.asarray(A, dtype=complex)
        return LaurentSeries(
            self.jmin, self.jmax, self.coeffs @ A, self.rho, self.rho_inner, self.rho_outer,
            self.C * max(np.linalg.norm(A, 2), 0.0), self.n_nodes,
        )


def _decay(denom: CPoly) -> tuple[float, float, float]:
    roots = denom.roots()
    inner = [abs(r) for r in roots if abs(r) < 1.0]
    outer = [abs(r) for r in roots if abs(r) > 1.0]
    r_in = max(inner, default=0.0)
    r_out = min(outer, default=float("inf"))
    return max(r_in, 1.0 / r_out), r_in, r_out


def _fit_C(coeffs: np.ndarray, jmin: int, rho: float) -> float:
    if coeffs.shape[0] == 0 or rho <= 0.0:
        return 0.0
    js = np.arange(jmin, jmin + coeffs.shape[0])
    norms = np.array([np.linalg.norm(c, 2) for c in coeffs])
    # tail only: the outer quarter of the window on each side of zero
    span = max(abs(js[0]), abs(js[-1]), 1)
    tail = np.abs(js) >= span * 3 // 4
    if not np.any(tail):
        tail = np.ones_like(js, dtype=bool)
    with np.errstate(over="ignore", divide="ignore"):
        ratio = norms[tail] / rho ** np.abs(js[tail]).astype(float)
    ratio = ratio[np.isfinite(ratio)]
    return float(ratio.max(initial=0.0))


def _values_on_circle(c: np.ndarray, N: int, workers) -> np.ndarray:
    """``sum_n c_n w^{nk}`` at ``w = exp(2 pi i / N)`` for k = 0..N-1; exact folding mod N."""
    folded = np.zeros((N,) + c.shape[1:], dtype=complex)
    for start in range(0, c.shape[0], N):
        chunk = c[start : start + N]
        folded[: chunk.shape[0]] += chunk
    return N * scipy.fft.ifft(folded, axis=0, workers=workers)


def _coeffs_at(numer: np.ndarray, denom: np.ndarray, N: int, jmin: int, jmax: int, workers) -> np.ndarray:
    vals = _values_on_circle(numer, N, workers) / _values_on_circle(denom, N, workers).reshape((N,) + (1,) * (numer.ndim - 1))
    spectrum = scipy.fft.fft(vals, axis=0, workers=workers) / N
    return spectrum[np.arange(jmin, jmax + 1) % N]


def laurent_from_rational(
    numer: MatrixPoly, denom: CPoly, jmin: int, jmax: int, tol: float = 1e-12, workers=None
) -> LaurentSeries:
    """Laurent coefficients of ``numer / denom`` on ``|z| = 1`` (``denom`` free of unit roots)."""
    if jmax < jmin:
        raise ValueError("empty window")
    width = jmax - jmin + 1
    workers = fft_workers() if workers is None else workers
    span = max(abs(jmin), abs(jmax)) + 1
    N = max(64, 1 << int(np.ceil(np.log2(4 * max(width, span)))))
    num = numer.coeffs
    den = denom.coeffs
    prev = _coeffs_at(num, den, N, jmin, jmax, workers)
    while True:
        if 2 * N > MAX_NODES:
            raise AliasingError(f"Laurent coefficients did not converge with {N} nodes; a pole is too close to |z|=1")
        N *= 2
        cur = _coeffs_at(num, den, N, jmin, jmax, workers)
        scale = max(float(np.max(np.abs(cur), initial=0.0)), np.finfo(float).tiny)
        if float(np.max(np.abs(cur - prev), initial=0.0)) <= tol * max(scale, 1.0):
            break
        prev = cur
    rho, r_in, r_out = _decay(denom)
    return LaurentSeries(jmin, jmax, cur, rho, r_in, r_out, _fit_C(cur, jmin, rho), N)


def laurent_coeffs(P: MatrixPoly, Qt: MatrixPoly, jmin: int, jmax: int, tol: float = 1e-12,
                   circle_tol: float = 1e-7, workers=None) -> LaurentSeries:
    """Laurent coefficients ``M_j`` of ``P^{-1} Qt`` on an annulus around the unit circle."""
    rem = is_removable(P, Qt, circle_tol)
    if not rem.removable:
        i, j, z0 = rem.offending
        raise NotRemovableError(f"entry ({i + 1},{j + 1}) of Adj(P) Qt has a pole at z0={z0:.6g}")
    return laurent_from_rational(rem.numerator, rem.denominator, jmin, jmax, tol, workers)


def causal_coeffs(P: MatrixPoly, Qt: MatrixPoly, jmax: int, tol: float = 1e-7) -> LaurentSeries:
    """Power-series coefficients by the recursion ``P_0 M_j = Qt_j - sum_k P_k M_{j-k}``."""
    if jmax < 0:
        raise ValueError("jmax must be non-negative")
    det = det_poly(P)
    if det.degree < 0:
        raise ValueError("det P(z) vanishes identically")
    roots = det.roots()
    if np.any(np.abs(roots) <= 1.0 + tol):
        raise ValueError("det P(z) has a root in the closed unit disk")
    P0inv = np.linalg.inv(P[0])
    out = np.zeros((jmax + 1, Qt.rows, Qt.cols), dtype=complex)
    for j in range(jmax + 1):
        acc = Qt[j].astype(complex)
        for k in range(1, min(j, P.degree) + 1):
            acc = acc - P[k] @ out[j - k]
        out[j] = P0inv @ acc
    rho, r_in, r_out = _decay(det)
    return LaurentSeries(0, jmax, out, rho, r_in, r_out, _fit_C(out, 0, rho), 0)


def convolution_residual(P: MatrixPoly, Qt: MatrixPoly, series: LaurentSeries) -> float:
    """``max_j || sum_k P_k M_{j-k} - Qt_j ||`` over the window interior (entrywise max)."""
    p = max(P.degree, 0)
    worst = 0.0
    for j in range(series.jmin + p, series.jmax + 1):
        acc = -Qt[j].astype(complex)
        for k in range(p + 1):
            acc = acc + P[k] @ series[j - k]
        worst = max(worst, float(np.max(np.abs(acc), initial=0.0)))
    return worst
