"""Existence, uniqueness and explicit solutions for ``Y_t - Psi1 Y_{t-1} = sum_k Theta_k Z_{t-k}``.

Everything is decided block by block on the Jordan form ``S^{-1} Psi1 S``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jordan import JordanForm, block_power, jordan_decompose
from .noise import NoiseModel, image_has_finite_log_moment, image_is_constant
from .report import BlockCondition, SeriesSolution, StationarityReport, Tolerances

CASES = ("inside", "outside", "zero", "unit_nontrivial", "unit_one")
FAILING = {"inside": "condition_i", "outside": "condition_i", "unit_nontrivial": "condition_ii", "unit_one": "condition_iii"}


@dataclass
class Arma1qModel:
    Psi1: np.ndarray
    Thetas: list
    noise: NoiseModel
    jordan: JordanForm | None = None

    def __post_init__(self):
        self.Psi1 = np.atleast_2d(np.asarray(self.Psi1, dtype=complex))
        self.Thetas = [np.atleast_2d(np.asarray(T, dtype=complex)) for T in self.Thetas]
        m = self.Psi1.shape[0]
        if self.Psi1.shape != (m, m):
            raise ValueError("Psi1 must be square")
        if not self.Thetas:
            raise ValueError("at least Theta_0 is required")
        for k, T in enumerate(self.Thetas):
            if T.shape != (m, self.noise.d):
                raise ValueError(f"Theta_{k} has shape {T.shape}, expected {(m, self.noise.d)}")
        if self.jordan is not None and self.jordan.m != m:
            raise ValueError("Jordan form dimension does not match Psi1")

    @property
    def m(self) -> int:
        return self.Psi1.shape[0]

    @property
    def d(self) -> int:
        return self.noise.d

    @property
    def q(self) -> int:
        return len(self.Thetas) - 1


def classify_eigenvalue(lam: complex, tol: Tolerances) -> tuple[str, bool, str | None]:
    """(case, uncertain, alternative case) of a Jordan eigenvalue."""
    r = abs(lam)
    if r < tol.circle:
        return "zero", r >= tol.exact, "inside"
    dist = abs(r - 1.0)
    if dist < tol.circle:
        off = "inside" if r < 1.0 else "outside"
        if abs(lam - 1.0) < tol.circle:
            if dist >= tol.exact:
                return "unit_one", True, off
            if abs(lam - 1.0) >= tol.exact:
                return "unit_one", True, "unit_nontrivial"
            return "unit_one", False, None
        return "unit_nontrivial", dist >= tol.exact, off
    return ("inside" if r < 1.0 else "outside"), False, None


def _snap(lam: complex, case: str) -> complex:
    if case == "zero":
        return 0.0
    if case == "unit_one":
        return 1.0
    if case == "unit_nontrivial":
        return lam / abs(lam)
    return lam


def block_terms(form: JordanForm, h: int, Thetas, S_inv) -> list[np.ndarray]:
    """``I_h S^{-1} Theta_k`` for k = 0..q."""
    b = form.blocks[h]
    rows = S_inv[b.start : b.start + b.size]
    return [rows @ T for T in Thetas]


def block_test_matrix(form: JordanForm, h: int, Thetas, S_inv) -> np.ndarray:
    """``B_h = sum_k Phi_h^{q-k} I_h S^{-1} Theta_k``."""
    b = form.blocks[h]
    return _combine(b.eigenvalue, b.size, block_terms(form, h, Thetas, S_inv))


def _combine(lam, size, terms) -> np.ndarray:
    q = len(terms) - 1
    return sum(block_power(lam, size, q - k) @ T for k, T in enumerate(terms))


def _term_scale(lam, size, terms, L) -> float:
    """Magnitude of the summands of ``B_h L``; the zero tests are relative to it."""
    q = len(terms) - 1
    tot = sum(np.linalg.norm(block_power(lam, size, q - k), 2) * np.linalg.norm(T, 2) for k, T in enumerate(terms))
    return float(max(tot * max(np.linalg.norm(L, 2), 1e-300), np.finfo(float).tiny))


def _evaluate_case(case, lam, size, B, terms, noise: NoiseModel, tol: Tolerances):
    """(passed, reason, alpha, f) for one block under a given case."""
    scale = _term_scale(lam, size, terms, noise.L)
    if case == "zero":
        return True, "eigenvalue 0: no condition", None, None
    if case in ("inside", "outside"):
        ok = image_has_finite_log_moment(noise, B, tol.poly_zero, scale)
        why = "log-moment of B_h Z_0 finite" if ok else "B_h Z_0 has an infinite log-moment"
        return ok, why, None, None
    alpha = image_is_constant(noise, B, tol.poly_zero, scale)
    if alpha is None:
        return False, "B_h Z_0 is not almost surely constant", None, None
    Phi = block_power(lam, size, 1)
    if case == "unit_nontrivial":
        f = np.linalg.solve(np.eye(size) - Phi, alpha)
        return True, "B_h Z_0 is almost surely constant", alpha, f
    cscale = scale * max(1.0, float(np.linalg.norm(noise.c))) / max(np.linalg.norm(noise.L, 2), 1e-300)
    if abs(alpha[0]) > tol.poly_zero * max(cscale, 1.0):
        return False, f"B_h Z_0 = alpha_h a.s. but alpha_h,1 = {alpha[0]:.3g} is not 0", alpha, None
    # (Id - Phi) is minus the lower shift for lambda = 1: f_i = -alpha_{i+1}, last entry free
    f = np.zeros(size, dtype=complex)
    f[: size - 1] = -alpha[1:]
    return True, "B_h Z_0 = alpha_h a.s. with alpha_h,1 = 0", alpha, f


def _decompose(model: Arma1qModel, tol: Tolerances) -> JordanForm:
    if model.jordan is not None:
        return model.jordan
    return jordan_decompose(model.Psi1, tol=tol.cluster)


def check_existence_1q(model: Arma1qModel, tol: Tolerances | None = None, window: int = 200) -> StationarityReport:
    """Block-wise existence and uniqueness verdict; builds the solution when it exists."""
    tol = tol or Tolerances()
    form = _decompose(model, tol)
    S_inv = np.linalg.inv(form.S)
    blocks: list[BlockCondition] = []
    alt_pass, alt_unit = [], []
    for h, b in enumerate(form.blocks):
        case, uncertain, alt = classify_eigenvalue(b.eigenvalue, tol)
        lam = _snap(b.eigenvalue, case)
        terms = block_terms(form, h, model.Thetas, S_inv)
        B = _combine(lam, b.size, terms)
        ok, why, alpha, f = _evaluate_case(case, lam, b.size, B, terms, model.noise, tol)
        blocks.append(BlockCondition(h, b.eigenvalue, b.size, b.start, case, B, ok, why, alpha, f, uncertain))
        if uncertain:
            alam = _snap(b.eigenvalue, alt)
            B_alt = _combine(alam, b.size, terms)
            alt_ok = _evaluate_case(alt, alam, b.size, B_alt, terms, model.noise, tol)[0]
            alt_pass.append(alt_ok)
            alt_unit.append(alt in ("unit_one", "unit_nontrivial"))
        else:
            alt_pass.append(ok)
            alt_unit.append(case in ("unit_one", "unit_nontrivial"))
    exists = all(bc.passed for bc in blocks)
    unique = not any(bc.case in ("unit_one", "unit_nontrivial") for bc in blocks)
    failing = next((bc for bc in blocks if not bc.passed), None)
    report = StationarityReport(
        order="1q",
        exists_strict=exists,
        unique=unique,
        failing_condition="none" if failing is None else FAILING[failing.case],
        reason="all block conditions hold" if failing is None else f"block {failing.h + 1} ({failing.case}): {failing.reason}",
        blocks=blocks,
        tolerances=tol,
        diagnostics={"jordan_residual": form.residual},
    )
    if not unique:
        report.reason += "; not unique (a unit-modulus eigenvalue admits a rotating independent component)"
    if any(bc.uncertain for bc in blocks):
        report.boundary_uncertain = True
        report.alternative = {"exists_strict": all(alt_pass), "unique": not any(alt_unit)}
        report.warnings.append("an eigenvalue lies in the tolerance band around a case boundary")
    if exists:
        report.solution = solution_coeffs_1q(model, window, report=report, form=form)
    return report


def block_coefficient(case: str, lam: complex, size: int, terms, j: int, dim: int) -> np.ndarray | None:
    """``N_{j,h}`` of the explicit solution (None where it vanishes by definition).

    ``dim`` is the matrix dimension bounding the nilpotent cut-off ``dim + q - 1``.
    """
    q = len(terms) - 1
    if case == "inside":
        if j < 0:
            return None
        ks = range(0, min(j, q) + 1)
        sign = 1.0
    elif case == "outside":
        if j > q - 1:
            return None
        ks = range(max(j + 1, 0), q + 1)
        sign = -1.0
    elif case == "zero":
        if not 0 <= j <= dim + q - 1:
            return None
        ks = range(0, min(j, q) + 1)
        sign = 1.0
    else:
        if not 0 <= j <= q - 1:
            return None
        ks = range(0, j + 1)
        sign = 1.0
    out = np.zeros_like(terms[0])
    for k in ks:
        out = out + block_power(lam, size, j - k) @ terms[k]
    return sign * out


def series_window(cases, q: int, dim: int, J: int) -> tuple[int, int]:
    lo, hi = 0, 0
    for case in cases:
        if case == "inside":
            hi = max(hi, J)
        elif case == "outside":
            lo = min(lo, -J)
            hi = max(hi, q - 1)
        elif case == "zero":
            hi = max(hi, dim + q - 1)
        else:
            hi = max(hi, q - 1)
    return lo, hi


def jordan_series(form: JordanForm, cases, Thetas, jmin: int, jmax: int, dim: int) -> np.ndarray:
    """Stacked block coefficients ``(N_{j,1}; ...; N_{j,H})`` for j in the window, shape (width, dim, d)."""
    S_inv = np.linalg.inv(form.S)
    d = Thetas[0].shape[1]
    out = np.zeros((jmax - jmin + 1, form.m, d), dtype=complex)
    for h, b in enumerate(form.blocks):
        lam = _snap(b.eigenvalue, cases[h])
        terms = block_terms(form, h, Thetas, S_inv)
        for j in range(jmin, jmax + 1):
            N = block_coefficient(cases[h], lam, b.size, terms, j, dim)
            if N is not None:
                out[j - jmin, b.start : b.start + b.size] = N
    return out


def solution_coeffs_1q(model: Arma1qModel, J: int = 200, report: StationarityReport | None = None,
                       form: JordanForm | None = None, tol: Tolerances | None = None) -> SeriesSolution:
    """Coefficients of ``Y_t = S (X_t^(1); ...; X_t^(H))`` truncated to ``|j| <= J``."""
    tol = tol or (report.tolerances if report is not None else Tolerances())
    if report is None:
        report = check_existence_1q(model, tol, window=J)
        if not report.exists_strict:
            raise ValueError("no strictly stationary solution exists")
        return report.solution
    if not report.exists_strict:
        raise ValueError("no strictly stationary solution exists")
    form = form or _decompose(model, tol)
    cases = [bc.case for bc in report.blocks]
    lo, hi = series_window(cases, model.q, model.m, J)
    stacked = jordan_series(form, cases, model.Thetas, lo, hi, model.m)
    coeffs = form.S @ stacked
    fvec = np.zeros(model.m, dtype=complex)
    for bc in report.blocks:
        if bc.f is not None:
            fvec[bc.start : bc.start + bc.size] = bc.f
    exact = all(c in ("zero", "unit_one", "unit_nontrivial") for c in cases)
    tail = 0.0
    if not exact:
        rates = [abs(bc.eigenvalue) if bc.case == "inside" else 1.0 / abs(bc.eigenvalue)
                 for bc in report.blocks if bc.case in ("inside", "outside")]
        rho = max(rates)
        # only the sides that decay geometrically carry tail mass
        edge = 0.0
        if any(c == "inside" for c in cases):
            edge = max(edge, np.linalg.norm(coeffs[-1], 2))
        if any(c == "outside" for c in cases):
            edge = max(edge, np.linalg.norm(coeffs[0], 2))
        size = max(bc.size for bc in report.blocks)
        tail = float(2.0 * edge * size * rho / (1.0 - rho))
    return SeriesSolution(form.S @ fvec, lo, coeffs, exact=exact, tail=tail,
                          gain=form.S @ _block_gains(form, cases, model.Thetas, stacked, lo))


def _block_gains(form: JordanForm, cases, Thetas, stacked, jmin: int) -> np.ndarray:
    """Exact ``sum_j N_{j,h}`` per block, stacked.

    Off the unit circle this is ``(Id - Phi_h)^{-1} sum_k T_k``; unit blocks
    have finitely many coefficients, all inside the stored window.
    """
    S_inv = np.linalg.inv(form.S)
    out = np.zeros(stacked.shape[1:], dtype=complex)
    for h, b in enumerate(form.blocks):
        rows = slice(b.start, b.start + b.size)
        if cases[h].startswith("unit"):
            out[rows] = stacked[:, rows].sum(axis=0)
        else:
            Phi = block_power(_snap(b.eigenvalue, cases[h]), b.size, 1)
            out[rows] = np.linalg.solve(np.eye(b.size) - Phi, sum(block_terms(form, h, Thetas, S_inv)))
    return out


def is_unique_1q(model: Arma1qModel, tol: Tolerances | None = None) -> bool:
    tol = tol or Tolerances()
    form = _decompose(model, tol)
    return not any(abs(abs(b.eigenvalue) - 1.0) < tol.circle for b in form.blocks)


def _off_circle(model: Arma1qModel, tol: Tolerances, allow_zero: bool) -> bool:
    eig = np.linalg.eigvals(model.Psi1)
    ok = np.all(np.abs(np.abs(eig) - 1.0) >= tol.circle)
    if not allow_zero:
        ok = ok and np.all(np.abs(eig) >= tol.circle)
    return bool(ok)


def _aggregate(model: Arma1qModel) -> np.ndarray:
    q = model.q
    return sum(np.linalg.matrix_power(model.Psi1, q - k) @ T for k, T in enumerate(model.Thetas))


def cor1_check(model: Arma1qModel, tol: Tolerances | None = None) -> bool | None:
    """Verdict when every eigenvalue has modulus in (0,1) or (1,inf); None if not applicable."""
    tol = tol or Tolerances()
    if not _off_circle(model, tol, allow_zero=False):
        return None
    A = _aggregate(model)
    terms = sum(np.linalg.norm(np.linalg.matrix_power(model.Psi1, model.q - k), 2) * np.linalg.norm(T, 2)
                for k, T in enumerate(model.Thetas))
    scale = max(terms * np.linalg.norm(model.noise.L, 2), np.finfo(float).tiny)
    return image_has_finite_log_moment(model.noise, A, tol.poly_zero, scale)


def cor2_check(model: Arma1qModel, tol: Tolerances | None = None) -> bool | None:
    """Verdict ``E log+ |Z_0| < inf`` when the aggregate matrix has full rank d; None if not applicable."""
    tol = tol or Tolerances()
    if model.d > model.m or not _off_circle(model, tol, allow_zero=False):
        return None
    A = _aggregate(model)
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.size < model.d or sv[model.d - 1] <= max(model.m, model.d) * np.finfo(float).eps * max(sv[0], 1.0) * 1e3:
        return None
    return model.noise.finite_log_moment
