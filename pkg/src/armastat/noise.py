"""Structured i.i.d. noise ``Z = L V + c`` with independent scalar components.

Every component of ``V`` is non-degenerate, so a linear image ``A Z`` is
almost surely constant iff ``A L = 0``, and it has a finite log-moment iff no
column of ``A L`` belonging to an infinite-log-moment component is nonzero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

FAMILIES = ("gaussian", "student_t", "cauchy", "alpha_stable", "log_cauchy")


class NoiseModelError(ValueError):
    pass


def _family_flags(family: str, params: dict) -> tuple[bool, bool, float | None]:
    """(finite_log_moment, finite_variance, variance) implied by a family."""
    scale = float(params.get("scale", 1.0))
    if scale <= 0:
        raise NoiseModelError(f"{family}: scale must be positive")
    if family == "gaussian":
        return True, True, scale**2
    if family == "student_t":
        if "df" not in params:
            raise NoiseModelError("student_t needs params['df']")
        nu = float(params["df"])
        if nu <= 0:
            raise NoiseModelError("student_t: df must be positive")
        if nu > 2:
            return True, True, scale**2 * nu / (nu - 2)
        return True, False, None
    if family == "cauchy":
        return True, False, None
    if family == "alpha_stable":
        if "alpha" not in params:
            raise NoiseModelError("alpha_stable needs params['alpha']")
        alpha = float(params["alpha"])
        if not 0 < alpha <= 2:
            raise NoiseModelError("alpha_stable: alpha must lie in (0, 2]")
        if alpha == 2:
            # scipy's alpha=2 stable law is N(0, 2 scale^2)
            return True, True, 2.0 * scale**2
        return True, False, None
    if family == "log_cauchy":
        return False, False, None
    raise NoiseModelError(f"unknown noise family {family!r}")


@dataclass(frozen=True)
class Component:
    """One independent scalar source.  Flags default to the family's values."""

    family: str
    params: dict = field(default_factory=dict)
    finite_log_moment: bool | None = None
    finite_variance: bool | None = None
    variance: float | None = None

    def __post_init__(self):
        flm, fv, var = _family_flags(self.family, self.params)
        if self.finite_log_moment is not None and self.finite_log_moment != flm:
            raise NoiseModelError(f"{self.family}: finite_log_moment={self.finite_log_moment} contradicts the family")
        if self.finite_variance is not None and self.finite_variance != fv:
            raise NoiseModelError(f"{self.family}: finite_variance={self.finite_variance} contradicts the family")
        object.__setattr__(self, "finite_log_moment", flm)
        object.__setattr__(self, "finite_variance", fv)
        object.__setattr__(self, "variance", var)

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        scale = float(self.params.get("scale", 1.0))
        if self.family == "gaussian":
            x = rng.standard_normal(count)
        elif self.family == "student_t":
            x = rng.standard_t(float(self.params["df"]), count)
        elif self.family == "cauchy":
            x = rng.standard_cauchy(count)
        elif self.family == "alpha_stable":
            alpha = float(self.params["alpha"])
            beta = float(self.params.get("beta", 0.0))
            x = stats.levy_stable.rvs(alpha, beta, size=count, random_state=rng)
        else:
            with np.errstate(over="ignore"):
                x = np.exp(rng.standard_cauchy(count))
        return scale * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class UnitarySplit:
    U: np.ndarray
    s: int
    u: np.ndarray

    @property
    def d(self) -> int:
        return self.U.shape[0]

    @property
    def projector(self) -> np.ndarray:
        """``diag(Id_s, 0)``."""
        lam = np.zeros((self.d, self.d), dtype=complex)
        lam[: self.s, : self.s] = np.eye(self.s)
        return lam

    @property
    def mean_vector(self) -> np.ndarray:
        """``(0_s, u)``: the constant part of ``U Z``."""
        return np.concatenate([np.zeros(self.s, dtype=complex), self.u])


class NoiseModel:
    """i.i.d. noise ``Z_t = L V_t + c`` in ``C^d`` driven by ``n`` independent components."""

    def __init__(self, L, c=None, components=None):
        L = np.atleast_2d(np.asarray(L, dtype=complex))
        d, n = L.shape
        c = np.zeros(d, dtype=complex) if c is None else np.asarray(c, dtype=complex).reshape(-1)
        if c.shape != (d,):
            raise NoiseModelError(f"shift c must have length {d}")
        if components is None:
            components = [Component("gaussian") for _ in range(n)]
        components = tuple(comp if isinstance(comp, Component) else Component(**comp) for comp in components)
        if len(components) != n:
            raise NoiseModelError(f"L has {n} columns but {len(components)} components were given")
        self.L = L
        self.c = c
        self.components = components
        self.L.setflags(write=False)
        self.c.setflags(write=False)

    @classmethod
    def gaussian(cls, d: int, c=None) -> "NoiseModel":
        return cls(np.eye(d), c)

    @property
    def d(self) -> int:
        return self.L.shape[0]

    @property
    def n(self) -> int:
        return self.L.shape[1]

    @property
    def heavy(self) -> list[int]:
        """Indices of components without a finite log-moment."""
        return [i for i, comp in enumerate(self.components) if not comp.finite_log_moment]

    @property
    def finite_variance(self) -> bool:
        return all(comp.finite_variance for comp in self.components)

    @property
    def finite_log_moment(self) -> bool:
        return not self.heavy

    def mean(self) -> np.ndarray:
        if not self.finite_variance:
            raise NoiseModelError("mean requested for noise without finite variance")
        # every finite-variance family offered here is centred
        return self.c.copy()

    def covariance(self) -> np.ndarray:
        if not self.finite_variance:
            raise NoiseModelError("covariance requested for noise without finite variance")
        var = np.array([comp.variance for comp in self.components], dtype=float)
        return (self.L * var) @ self.L.conj().T

    def __repr__(self) -> str:
        fams = ",".join(comp.family for comp in self.components)
        return f"NoiseModel(d={self.d}, n={self.n}, components=[{fams}])"


def _rank_and_svd(model: NoiseModel, rank_tol: float | None):
    Uf, sv, _ = np.linalg.svd(model.L, full_matrices=True)
    if sv.size == 0 or sv[0] == 0.0:
        return Uf, 0
    rel = max(model.d, model.n) * np.finfo(float).eps if rank_tol is None else rank_tol
    return Uf, int(np.sum(sv > rel * sv[0]))


def degenerate_subspace(model: NoiseModel, rank_tol: float | None = None) -> np.ndarray:
    """Orthonormal basis (as columns) of ``K = {a : a^* Z_0 is a.s. constant}``."""
    Uf, s = _rank_and_svd(model, rank_tol)
    return Uf[:, s:]


def unitary_split(model: NoiseModel, rank_tol: float | None = None) -> UnitarySplit:
    """Unitary ``U`` with ``U K^perp = C^s x {0}``, plus the constant tail ``u`` of ``U Z``."""
    Uf, s = _rank_and_svd(model, rank_tol)
    U = Uf.conj().T
    return UnitarySplit(U=U, s=s, u=U[s:] @ model.c)


def _check_cols(model: NoiseModel, A) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.shape[1] != model.d:
        raise ValueError(f"matrix has {A.shape[1]} columns, noise dimension is {model.d}")
    return A


def _default_scale(A: np.ndarray, L: np.ndarray) -> float:
    return float(np.max(np.abs(A), initial=0.0) * np.max(np.abs(L), initial=0.0) * L.shape[0])


def image_is_constant(model: NoiseModel, A, tol: float = 1e-9, scale: float | None = None):
    """Return ``A c`` if ``A Z_0`` is a.s. constant, else ``None``.

    ``scale`` sets the magnitude against which ``A L`` is zero-tested; pass it
    when ``A`` is the result of a computation whose rounding level is larger
    than ``|A|`` itself.
    """
    A = _check_cols(model, A)
    AL = A @ model.L
    ref = _default_scale(A, model.L) if scale is None else scale
    if np.max(np.abs(AL), initial=0.0) <= tol * ref:
        return A @ model.c
    return None


def image_has_finite_log_moment(model: NoiseModel, A, tol: float = 1e-9, scale: float | None = None) -> bool:
    """Whether ``E log+ |A Z_0| < inf`` under the structural model."""
    A = _check_cols(model, A)
    heavy = model.heavy
    if not heavy:
        return True
    cols = (A @ model.L)[:, heavy]
    ref = _default_scale(A, model.L) if scale is None else scale
    return bool(np.max(np.abs(cols), initial=0.0) <= tol * ref)


def sample_components(model: NoiseModel, count: int, seed: int) -> np.ndarray:
    """``count`` i.i.d. draws of the independent components ``V``, shape (count, n)."""
    if count < 0:
        raise ValueError("count must be non-negative")
    rng = np.random.default_rng(seed)
    V = np.empty((count, model.n), dtype=float)
    for i, comp in enumerate(model.components):
        V[:, i] = comp.draw(rng, count)
    return V


def mix(model: NoiseModel, V) -> np.ndarray:
    """``Z = L V + c`` row by row."""
    V = np.asarray(V)
    Z = np.tile(model.c, (V.shape[0], 1))
    # column by column so that a structural zero in L never meets an
    # overflowed heavy draw (0 * inf would poison the whole coordinate)
    with np.errstate(invalid="ignore", over="ignore"):
        for i in range(model.n):
            col = model.L[:, i]
            nz = np.nonzero(col)[0]
            Z[:, nz] += V[:, i : i + 1] * col[nz]
    return Z


def sample(model: NoiseModel, count: int, seed: int) -> np.ndarray:
    """``count`` i.i.d. draws of ``Z``, shape (count, d); deterministic in ``seed``."""
    return mix(model, sample_components(model, count, seed))
