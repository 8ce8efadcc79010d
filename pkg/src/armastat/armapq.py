"""Existence analysis for ``Y_t - sum_k Psi_k Y_{t-k} = sum_k Theta_k Z_{t-k}``.

The primary verdict works with the characteristic polynomials only.  The
companion embedding and its Jordan form are used for cross-checks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .arma1q import classify_eigenvalue, jordan_series
from .jordan import JordanForm, jordan_decompose
from .mpoly import CPoly, MatrixPoly, are_left_coprime, det_poly, gcld, roots_with_multiplicity
from .noise import NoiseModel, UnitarySplit, unitary_split
from .rational import (
    MERGE_RADIUS,
    LaurentSeries,
    Removability,
    causal_coeffs,
    convolution_residual,
    det_roots,
    is_removable,
    laurent_from_rational,
)
from .report import NOT_APPLICABLE, SeriesSolution, StationarityReport, Tolerances


@dataclass
class ArmapqModel:
    Psis: list
    Thetas: list
    noise: NoiseModel

    def __post_init__(self):
        self.Psis = [np.atleast_2d(np.asarray(X, dtype=complex)) for X in self.Psis]
        self.Thetas = [np.atleast_2d(np.asarray(T, dtype=complex)) for T in self.Thetas]
        if not self.Psis:
            raise ValueError("p >= 1 is required")
        if not self.Thetas:
            raise ValueError("at least Theta_0 is required")
        m = self.Psis[0].shape[0]
        for k, X in enumerate(self.Psis, start=1):
            if X.shape != (m, m):
                raise ValueError(f"Psi_{k} has shape {X.shape}, expected {(m, m)}")
        for k, T in enumerate(self.Thetas):
            if T.shape != (m, self.noise.d):
                raise ValueError(f"Theta_{k} has shape {T.shape}, expected {(m, self.noise.d)}")

    @property
    def m(self) -> int:
        return self.Psis[0].shape[0]

    @property
    def d(self) -> int:
        return self.noise.d

    @property
    def p(self) -> int:
        return len(self.Psis)

    @property
    def q(self) -> int:
        return len(self.Thetas) - 1

    def P(self) -> MatrixPoly:
        return MatrixPoly.ar(self.Psis)

    def Q(self) -> MatrixPoly:
        return MatrixPoly(np.stack(self.Thetas))


@dataclass(frozen=True)
class CompanionEmbedding:
    Phi_under: np.ndarray
    Theta_unders: list


def embed_companion(model: ArmapqModel) -> CompanionEmbedding:
    """First block row ``Psi_1 .. Psi_p``, identity blocks on the block subdiagonal."""
    m, p = model.m, model.p
    Phi = np.zeros((m * p, m * p), dtype=complex)
    Phi[:m] = np.hstack(model.Psis)
    Phi[m:, : m * (p - 1)] = np.eye(m * (p - 1))
    thetas = []
    for T in model.Thetas:
        X = np.zeros((m * p, model.d), dtype=complex)
        X[:m] = T
        thetas.append(X)
    return CompanionEmbedding(Phi, thetas)


def build_Qtilde(model: ArmapqModel, split: UnitarySplit | None = None, tol: Tolerances | None = None) -> MatrixPoly:
    """``Qt(z) = Q(z) U^* diag(Id_s, 0)``."""
    tol = tol or Tolerances()
    split = split or unitary_split(model.noise, tol.rank)
    right = split.U.conj().T @ split.projector
    return MatrixPoly(model.Q().coeffs @ right)


def _mean_equation(model: ArmapqModel, split: UnitarySplit, tol: Tolerances):
    """Solve ``P(1) g = Q(1) U^* (v; u)`` jointly over (g, v).

    Returns (solvable, g, v, residual, for_all_v).
    """
    P1 = model.P()(1.0)
    Q1U = model.Q()(1.0) @ split.U.conj().T
    s = split.s
    A = np.hstack([P1, -Q1U[:, :s]])
    b = Q1U[:, s:] @ split.u
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    res = float(np.linalg.norm(A @ x - b))
    ref = max(np.linalg.norm(A, 2) * np.linalg.norm(x) + np.linalg.norm(b), 1.0)
    ok = res <= tol.poly_zero * ref
    # (iii'): every column of Q(1) U^* (restricted to the first s) and b in range P(1)
    sv = np.linalg.svd(P1, compute_uv=False)
    cut = tol.poly_zero * max(sv[0] if sv.size else 0.0, 1.0)
    rank_P = int(np.sum(sv > cut))
    aug = np.hstack([P1, Q1U[:, :s], b[:, None]])
    sv_aug = np.linalg.svd(aug, compute_uv=False)
    rank_aug = int(np.sum(sv_aug > tol.poly_zero * max(sv_aug[0] if sv_aug.size else 0.0, 1.0)))
    return ok, x[: model.m], x[model.m :], res, rank_aug == rank_P


def logmoment_indices(model: ArmapqModel, causal: bool = False) -> list[int]:
    n = model.m * model.p + model.q
    top = list(range(n - model.p + 1, n + 1))
    return top if causal else top + list(range(-model.p, 0))


def _column_polynomial(numer: MatrixPoly, denom: CPoly, col: np.ndarray, tol: Tolerances) -> bool:
    """Whether ``numer(z) col / denom(z)`` is a polynomial (finitely many Laurent terms)."""
    c = numer.coeffs @ col
    scale = numer.scale * max(np.linalg.norm(col), 1e-300)
    entries = [CPoly(c[:, i]) for i in range(c.shape[1])]
    entries = [e for e in entries if not e.is_zero(tol.poly_zero, scale)]
    if not entries or denom.degree <= 0:
        return True
    for r, mu in roots_with_multiplicity(denom, merge_radius=MERGE_RADIUS):
        for e in entries:
            if e.order_at(r, tol.poly_zero, cap=mu) < mu:
                return False
    return True


def _log_moment_check(series: LaurentSeries, rem: Removability, split: UnitarySplit, noise: NoiseModel,
                      indices, tol: Tolerances):
    """Check ``E log+ |M_j U Z_0| < inf`` on ``indices`` under the structural noise model.

    Column i of ``M_j U L`` must vanish for every heavy component i.  A column
    counts as zero at lag j when it is below ``poly_zero`` times the largest
    value it attains over the window, or when its numerator vanishes
    identically.  An exact divisibility test runs alongside; a disagreement is
    reported as a warning.  Returns (passed, (j, i) or None, warnings).
    """
    warnings = []
    UL = split.U @ noise.L
    for i in noise.heavy:
        numer = rem.numerator.coeffs @ UL[:, i]
        ref = rem.numerator.scale * max(np.linalg.norm(UL[:, i]), 1e-300)
        if np.max(np.abs(numer), initial=0.0) <= tol.poly_zero * ref:
            continue
        col = series.coeffs @ UL[:, i]
        window_max = float(np.max(np.abs(col), initial=0.0))
        bad = next((j for j in indices if np.max(np.abs(series.get(j) @ UL[:, i])) > tol.poly_zero * window_max), None)
        if (bad is None) != _column_polynomial(rem.numerator, rem.denominator, UL[:, i], tol):
            warnings.append(f"heavy component {i + 1}: index-set log-moment test and exact divisibility test disagree")
        if bad is not None:
            return False, (bad, i), warnings
    return True, None, warnings


def _window(model: ArmapqModel, J: int) -> tuple[int, int]:
    return min(-J, -model.p), max(J, model.m * model.p + model.q)


def check_existence_pq(model: ArmapqModel, tol: Tolerances | None = None, window: int = 200) -> StationarityReport:
    """Removability (i), log-moment (ii) and mean equation (iii) on the characteristic polynomials."""
    tol = tol or Tolerances()
    split = unitary_split(model.noise, tol.rank)
    P = model.P()
    Qt = build_Qtilde(model, split, tol)
    det, roots = det_roots(P)
    near = [(z0, mu) for z0, mu in roots if abs(abs(z0) - 1.0) < tol.circle]
    uncertain = [(z0, mu) for z0, mu in near if abs(abs(z0) - 1.0) >= tol.exact]
    unique = not near
    report = StationarityReport(order="pq", exists_strict=False, unique=unique, s=split.s, tolerances=tol)
    report.diagnostics["unit_circle_roots"] = [[z0, mu] for z0, mu in near]
    ok3, g, v, res3, for_all_v = _mean_equation(model, split, tol)
    report.diagnostics["mean_equation_residual"] = res3
    if uncertain:
        report.boundary_uncertain = True
        alt_rem = is_removable(P, Qt, tol.exact, tol.poly_zero)
        report.alternative = {
            "removable": alt_rem.removable,
            "mean_equation": ok3,
            "unique": not any(abs(abs(z0) - 1.0) < tol.exact for z0, _ in near),
        }
        report.warnings.append("a root of det P(z) lies in the tolerance band around the unit circle")

    rem = is_removable(P, Qt, tol.circle, tol.poly_zero)
    if not rem.removable:
        i, j, z0 = rem.offending
        report.failing_condition = "removability"
        report.reason = f"entry ({i + 1},{j + 1}) of M(z) has a non-removable singularity at z0={_fmt(z0)}"
        return report
    if ok3 != for_all_v:
        report.warnings.append("mean equation: solvability for some v and for all v disagree (rank tolerance)")

    lo, hi = _window(model, window)
    series = laurent_from_rational(rem.numerator, rem.denominator, lo, hi, tol.laurent)
    report.laurent = series
    report.diagnostics["convolution_residual"] = convolution_residual(P, Qt, series)
    ok2, bad, warns = _log_moment_check(series, rem, split, model.noise, logmoment_indices(model), tol)
    report.warnings.extend(warns)
    if not ok2:
        j, i = bad
        report.failing_condition = "log_moment"
        report.reason = f"M_{j} U Z_0 has an infinite log-moment (heavy component {i + 1} enters)"
        return report
    if not ok3:
        report.failing_condition = "mean_equation"
        report.reason = "P(1) g = Q(1) U^* (v; u) has no solution (g, v)"
        return report
    report.exists_strict = True
    report.g, report.v = g, v
    report.reason = "conditions (i), (ii), (iii) hold"
    if not unique:
        report.reason += "; not unique since det P(z) vanishes on the unit circle"
    report.solution = _series_solution(rem, series, split, g, np.concatenate([v, split.u]))
    return report


def _fmt(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.6g}{z.imag:+.6g}i"


def _series_solution(rem: Removability, series: LaurentSeries, split: UnitarySplit, g, shift) -> SeriesSolution:
    """``Y_t = g - M(1) shift + sum_j M_j U Z_{t-j}``."""
    M1 = rem.numerator(1.0) / rem.denominator(1.0)
    coeffs = series.coeffs @ split.U
    const = np.asarray(g, dtype=complex) - M1 @ shift
    exact = rem.denominator.degree <= 0
    return SeriesSolution(const, series.jmin, coeffs, exact=exact, tail=series.tail_bound(min(-series.jmin, series.jmax)),
                          gain=M1 @ split.U)


def solution_coeffs_pq(model: ArmapqModel, tol: Tolerances | None = None, window: int = 200):
    """(g, v, LaurentSeries) of the constructed solution."""
    report = check_existence_pq(model, tol, window)
    if not report.exists_strict:
        raise ValueError(f"no strictly stationary solution exists: {report.reason}")
    return report.g, report.v, report.laurent


@dataclass
class WeakResult:
    exists: bool
    removable: bool
    mean_solvable: bool
    g: np.ndarray | None
    s: int
    U: np.ndarray
    laurent: LaurentSeries | None = None
    solution: SeriesSolution | None = None


def check_weak(model: ArmapqModel, mean, covariance, tol: Tolerances | None = None, window: int = 200) -> WeakResult:
    """Weak-stationarity verdict from the first two moments of the noise."""
    tol = tol or Tolerances()
    mean = np.asarray(mean, dtype=complex).reshape(-1)
    Sigma = np.asarray(covariance, dtype=complex)
    Sigma = 0.5 * (Sigma + Sigma.conj().T)
    w, V = np.linalg.eigh(Sigma)
    top = max(float(np.max(np.abs(w), initial=0.0)), 1.0)
    if np.any(w < -1e-10 * top):
        raise ValueError("covariance is not positive semidefinite")
    order = np.argsort(-w)
    w, V = w[order], V[:, order]
    s = int(np.sum(w > max(model.d, 1) * np.finfo(float).eps * 10 * top))
    U = V.conj().T
    lam = np.zeros((model.d, model.d))
    lam[:s, :s] = np.eye(s)
    P = model.P()
    Qt = MatrixPoly(model.Q().coeffs @ (U.conj().T @ lam))
    rem = is_removable(P, Qt, tol.circle, tol.poly_zero)
    P1 = P(1.0)
    b = model.Q()(1.0) @ mean
    g, *_ = np.linalg.lstsq(P1, b, rcond=None)
    res = np.linalg.norm(P1 @ g - b)
    mean_ok = bool(res <= tol.poly_zero * max(np.linalg.norm(P1, 2) * np.linalg.norm(g) + np.linalg.norm(b), 1.0))
    out = WeakResult(rem.removable and mean_ok, rem.removable, mean_ok, g if mean_ok else None, s, U)
    if out.exists:
        lo, hi = _window(model, window)
        series = laurent_from_rational(rem.numerator, rem.denominator, lo, hi, tol.laurent)
        M1 = rem.numerator(1.0) / rem.denominator(1.0)
        out.laurent = series
        out.solution = SeriesSolution(
            g - M1 @ (U @ mean), lo, series.coeffs @ U, exact=rem.denominator.degree <= 0,
            tail=series.tail_bound(min(-lo, hi)), gain=M1 @ U,
        )
    return out


def check_causal(model: ArmapqModel, tol: Tolerances | None = None) -> bool | str:
    """Causal solution verdict for left-coprime ``P``, ``Qt``; ``"not_applicable"`` otherwise."""
    tol = tol or Tolerances()
    split = unitary_split(model.noise, tol.rank)
    P = model.P()
    Qt = build_Qtilde(model, split, tol)
    if not are_left_coprime(P, Qt, tol.poly_zero):
        return NOT_APPLICABLE
    det = det_poly(P)
    if np.any(np.abs(det.roots()) <= 1.0 + tol.circle):
        return False
    idx = logmoment_indices(model, causal=True)
    series = causal_coeffs(P, Qt, max(idx), tol.circle)
    UL = split.U @ model.noise.L
    for i in model.noise.heavy:
        col = series.coeffs @ UL[:, i]
        window_max = float(np.max(np.abs(col), initial=0.0))
        if any(np.max(np.abs(col[j])) > tol.poly_zero * window_max for j in idx):
            return False
    return True


def cor3_necessary(model: ArmapqModel, tol: Tolerances | None = None) -> bool:
    """Removability of ``det(Qt Qt^*) / |det P|^2`` (and of ``det Qt / det P`` when d = m) on the circle.

    On ``|z| = 1`` the ratio equals ``z^(n - m q) det(Qt(z) Qt^r(z)) / (det P(z) det P^r(z))``
    with ``Qt^r(z) = z^q Qt(1/conj z)^*`` and ``det P^r`` the conjugate reversal of
    ``det P`` at degree n; the reversal has the same order at every unit root.
    """
    tol = tol or Tolerances()
    split = unitary_split(model.noise, tol.rank)
    Qt = build_Qtilde(model, split, tol)
    det, roots = det_roots(model.P())
    sing = [(z0, mu) for z0, mu in roots if abs(abs(z0) - 1.0) < tol.circle]
    if not sing:
        return True
    gram = det_poly(Qt @ Qt.reversed_conj(model.q), tol=0.0)
    square = det_poly(Qt, tol=0.0) if model.d == model.m else None
    for z0, mu in sing:
        if not gram.is_zero(tol.poly_zero, max(gram.scale, 1.0)) and gram.order_at(z0, tol.poly_zero, cap=2 * mu) < 2 * mu:
            return False
        if square is not None and not square.is_zero(tol.poly_zero, max(square.scale, 1.0)):
            if square.order_at(z0, tol.poly_zero, cap=mu) < mu:
                return False
    return True


def jordan_path_coeffs(model: ArmapqModel, jmin: int, jmax: int, tol: Tolerances | None = None,
                       form: JordanForm | None = None) -> LaurentSeries:
    """``N_j = S (N_{j,1}; ...; N_{j,H})`` on the companion matrix, j in [jmin, jmax]."""
    tol = tol or Tolerances()
    emb = embed_companion(model)
    form = form or jordan_decompose(emb.Phi_under, tol=tol.cluster)
    cases = [classify_eigenvalue(b.eigenvalue, tol)[0] for b in form.blocks]
    stacked = jordan_series(form, cases, emb.Theta_unders, jmin, jmax, model.m * model.p)
    return LaurentSeries(jmin, jmax, form.S @ stacked)


def cross_check_jordan_path(model: ArmapqModel, jmin: int = -10, jmax: int = 20, tol: Tolerances | None = None) -> float:
    """Max over j of ``|(M_j; ...; M_{j-p+1}) - N_j U^* diag(Id_s, 0)|``."""
    tol = tol or Tolerances()
    split = unitary_split(model.noise, tol.rank)
    P = model.P()
    Qt = build_Qtilde(model, split, tol)
    rem = is_removable(P, Qt, tol.circle, tol.poly_zero)
    if not rem.removable:
        raise ValueError("M(z) has a non-removable singularity on the unit circle")
    p = model.p
    M = laurent_from_rational(rem.numerator, rem.denominator, jmin - p + 1, jmax, tol.laurent)
    N = jordan_path_coeffs(model, jmin, jmax, tol)
    right = split.U.conj().T @ split.projector
    worst = 0.0
    for j in range(jmin, jmax + 1):
        lhs = np.vstack([M[j - k] for k in range(p)])
        worst = max(worst, float(np.max(np.abs(lhs - N[j] @ right), initial=0.0)))
    return worst


def check_strict_weak_equivalence(model: ArmapqModel, tol: Tolerances | None = None) -> bool:
    """Strict and weak verdicts agree (finite-variance noise only)."""
    if not model.noise.finite_variance:
        raise ValueError("noise must have finite variance")
    strict = check_existence_pq(model, tol, window=50).exists_strict
    weak = check_weak(model, model.noise.mean(), model.noise.covariance(), tol, window=50).exists
    return strict == weak


def stack_matrix_noise(Psis, Thetas, d_prime: int, noise: NoiseModel | None = None) -> ArmapqModel:
    """Vectorised model for matrix-valued ``Z_t`` (d x d') and ``Y_t`` (m x d')."""
    if d_prime < 1:
        raise ValueError("d_prime must be positive")
    Psis2 = [block_diag(*([np.asarray(X, dtype=complex)] * d_prime)) for X in Psis]
    Thetas2 = [block_diag(*([np.asarray(T, dtype=complex)] * d_prime)) for T in Thetas]
    if noise is None:
        noise = NoiseModel.gaussian(Thetas2[0].shape[1])
    return ArmapqModel(Psis2, Thetas2, noise)


def gcld_summary(model: ArmapqModel, tol: Tolerances | None = None) -> dict:
    """Degree of ``det R`` for a greatest common left divisor R of ``P`` and ``Qt``."""
    tol = tol or Tolerances()
    P = model.P()
    Qt = build_Qtilde(model, None, tol)
    R, _, _ = gcld(P, Qt, tol.poly_zero)
    detR = det_poly(R, tol=0.0)
    c = detR.coeffs
    scale = float(np.max(np.abs(c), initial=0.0))
    nz = np.nonzero(np.abs(c) > tol.poly_zero * scale)[0] if scale > 0 else []
    degree = int(nz[-1]) if len(nz) else -1
    return {"det_R_degree": degree, "coprime": are_left_coprime(P, Qt, tol.poly_zero)}
