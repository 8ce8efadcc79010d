"""Result containers shared by the analyzers, and their JSON encoding."""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

import numpy as np

NOT_APPLICABLE = "not_applicable"
NOT_EVALUATED = "not_evaluated"


@dataclass(frozen=True)
class Tolerances:
    """Numerical knobs, all surfaced in reports.

    ``circle``: band ``| |z| - 1 | < circle`` classified as on the unit circle.
    ``exact``: inside this band the classification is considered certain;
    between ``exact`` and ``circle`` the verdict is flagged boundary-uncertain.
    ``rank``: relative singular-value cut for the rank of ``L`` (None means
    ``max(d, n) * eps``).  ``poly_zero``: relative zero test for polynomial
    coefficients and linear-image tests.  ``cluster``: eigenvalue clustering
    for Jordan forms.  ``laurent``: FFT convergence tolerance.
    """

    circle: float = 1e-7
    exact: float = 1e-13
    rank: float | None = None
    poly_zero: float = 1e-9
    cluster: float = 1e-6
    laurent: float = 1e-12

    def __post_init__(self):
        if not 0 < self.exact <= self.circle:
            raise ValueError("tolerances must satisfy 0 < exact <= circle")

    def with_(self, **kw) -> "Tolerances":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def classify_modulus(z: complex, tol: Tolerances) -> tuple[bool, bool]:
    """(on_circle, uncertain) for a root or eigenvalue."""
    dist = abs(abs(z) - 1.0)
    return dist < tol.circle, tol.exact <= dist < tol.circle


@dataclass
class BlockCondition:
    h: int
    eigenvalue: complex
    size: int
    start: int
    case: str  # inside | outside | zero | unit_nontrivial | unit_one
    B: np.ndarray
    passed: bool
    reason: str
    alpha: np.ndarray | None = None
    f: np.ndarray | None = None
    uncertain: bool = False

    def to_dict(self) -> dict:
        return {
            "h": self.h + 1,
            "eigenvalue": encode(self.eigenvalue),
            "size": self.size,
            "start_row": self.start + 1,
            "case": self.case,
            "B": encode(self.B),
            "passed": self.passed,
            "reason": self.reason,
            "alpha": encode(self.alpha),
            "f": encode(self.f),
            "boundary_uncertain": self.uncertain,
        }


@dataclass
class SeriesSolution:
    """``Y_t = constant + sum_j coeffs[j - jmin] Z_{t-j}`` (truncated to the window)."""

    constant: np.ndarray
    jmin: int
    coeffs: np.ndarray  # (width, m, d)
    exact: bool = False  # finitely many nonzero coefficients, all stored
    tail: float = 0.0  # estimated norm mass outside the window
    gain: np.ndarray | None = None  # exact sum of C_j over all j, used for the noise mean

    @property
    def jmax(self) -> int:
        return self.jmin + self.coeffs.shape[0] - 1

    def get(self, j: int) -> np.ndarray:
        if self.jmin <= j <= self.jmax:
            return self.coeffs[j - self.jmin]
        return np.zeros(self.coeffs.shape[1:], dtype=complex)

    def truncated(self, J: int) -> "SeriesSolution":
        lo, hi = max(self.jmin, -J), min(self.jmax, J)
        if hi < lo:
            return replace(self, jmin=0, coeffs=np.zeros((1,) + self.coeffs.shape[1:], dtype=complex))
        return replace(self, jmin=lo, coeffs=self.coeffs[lo - self.jmin : hi - self.jmin + 1])


@dataclass
class StationarityReport:
    order: str
    exists_strict: bool
    unique: bool
    failing_condition: str = "none"
    reason: str = ""
    exists_weak: bool | str = NOT_EVALUATED
    exists_causal: bool | str = NOT_EVALUATED
    boundary_uncertain: bool = False
    alternative: dict | None = None
    g: np.ndarray | None = None
    v: np.ndarray | None = None
    s: int | None = None
    blocks: list[BlockCondition] = field(default_factory=list)
    laurent: object | None = None
    solution: SeriesSolution | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    diagnostics: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if self.boundary_uncertain:
            return 3
        return 0 if self.exists_strict else 2

    def to_dict(self) -> dict:
        out = {
            "order": self.order,
            "verdicts": {
                "exists_strict": self.exists_strict,
                "unique": self.unique,
                "exists_weak": self.exists_weak,
                "exists_causal": self.exists_causal,
                "boundary_uncertain": self.boundary_uncertain,
            },
            "failing_condition": self.failing_condition,
            "reason": self.reason,
            "alternative": self.alternative,
            "g": encode(self.g),
            "v": encode(self.v),
            "s": self.s,
            "blocks": [b.to_dict() for b in self.blocks],
            "laurent": None,
            "tolerances": self.tolerances.to_dict(),
            "diagnostics": encode(self.diagnostics),
            "warnings": list(self.warnings),
        }
        if self.laurent is not None:
            L = self.laurent
            out["laurent"] = {
                "jmin": L.jmin,
                "jmax": L.jmax,
                "norms": [float(x) for x in L.norms()],
                "rho": float(L.rho),
                "n_nodes": int(L.n_nodes),
            }
        return out


def encode(x):
    """JSON-ready form: complex scalars as ``[re, im]``, arrays as nested lists."""
    if x is None or isinstance(x, (bool, str, int)):
        return x
    if isinstance(x, float):
        return x if np.isfinite(x) else repr(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.generic):
        return encode(x.item())
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return np.stack([x.real, x.imag], axis=-1).tolist()
        return x.tolist()
    if isinstance(x, dict):
        return {str(k): encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    return x


def decode_matrix(x, shape=None) -> np.ndarray:
    """Inverse of :func:`encode` for numeric data; real entries are accepted as well."""
    a = np.asarray(x, dtype=float)
    if shape is not None and a.shape == tuple(shape):
        out = a.astype(complex)
    elif shape is not None and a.shape == tuple(shape) + (2,):
        out = a[..., 0] + 1j * a[..., 1]
    elif shape is None and a.ndim >= 1 and a.shape[-1] == 2:
        out = a[..., 0] + 1j * a[..., 1]
    else:
        raise ValueError(f"cannot decode array of shape {a.shape} as {shape}")
    return out
