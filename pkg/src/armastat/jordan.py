"""Numerical Jordan decomposition, lower-subdiagonal convention.

A Jordan block of size n for eigenvalue lam has lam on the diagonal and ones
on the first *sub*diagonal, so that ``A s_i = lam s_i + s_{i+1}`` along a
chain of columns of ``S``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from .mpoly import _single_linkage


class JordanError(ArithmeticError):
    """Decomposition failed or reconstructs ``A`` too poorly."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class JordanBlock:
    eigenvalue: complex
    size: int
    start: int  # 0-based first row of the block


@dataclass(frozen=True)
class JordanForm:
    S: np.ndarray
    blocks: tuple[JordanBlock, ...]
    tol: float = 0.0
    residual: float = 0.0

    @classmethod
    def from_blocks(cls, S, spec, A=None, tol: float = 0.0) -> "JordanForm":
        """Assemble from ``[(eigenvalue, size), ...]``; measures the residual if ``A`` is given."""
        blocks, start = [], 0
        for lam, size in spec:
            blocks.append(JordanBlock(complex(lam), int(size), start))
            start += int(size)
        S = np.asarray(S, dtype=complex)
        if start != S.shape[0]:
            raise ValueError("block sizes do not add up to the matrix dimension")
        form = cls(S, tuple(blocks), tol)
        if A is not None:
            form = cls(S, tuple(blocks), tol, reconstruction_residual(A, form))
        return form

    @property
    def m(self) -> int:
        return self.S.shape[0]

    @property
    def H(self) -> int:
        return len(self.blocks)

    def J(self) -> np.ndarray:
        J = np.zeros((self.m, self.m), dtype=complex)
        for b in self.blocks:
            J[b.start : b.start + b.size, b.start : b.start + b.size] = block_power(b.eigenvalue, b.size, 1)
        return J

    def block(self, h: int) -> np.ndarray:
        b = self.blocks[h]
        return block_power(b.eigenvalue, b.size, 1)

    def selector(self, h: int) -> np.ndarray:
        return block_selector(self, h)

    def to_dict(self) -> dict:
        return {
            "blocks": [
                {"eigenvalue": [b.eigenvalue.real, b.eigenvalue.imag], "size": b.size, "start_row": b.start + 1}
                for b in self.blocks
            ],
            "residual": self.residual,
            "tol": self.tol,
        }


def reconstruction_residual(A, form: JordanForm) -> float:
    A = np.asarray(A, dtype=complex)
    err = np.linalg.norm(np.linalg.solve(form.S, A @ form.S) - form.J(), 2)
    return float(err / max(np.linalg.norm(A, 2), 1.0))


def gen_binom(j: int, l: int) -> float:
    """Generalised binomial coefficient ``j (j-1) ... (j-l+1) / l!`` (valid for j < 0)."""
    if j >= 0:
        return float(comb(j, l))
    num = 1.0
    for i in range(l):
        num *= j - i
    return num / factorial(l)


def block_power(lam: complex, size: int, j: int) -> np.ndarray:
    """``Phi**j`` for a lower Jordan block: entry (i, i-l) is ``C(j, l) lam**(j-l)``."""
    if j < 0 and lam == 0:
        raise ValueError("negative power of a singular Jordan block")
    out = np.zeros((size, size), dtype=complex)
    for l in range(size):
        b = gen_binom(j, l)
        if b == 0.0:
            continue
        out += np.diag(np.full(size - l, b * complex(lam) ** (j - l)), -l)
    return out


def block_selector(form: JordanForm, h: int) -> np.ndarray:
    """Rows ``start .. start+size-1`` of the identity."""
    if not 0 <= h < form.H:
        raise IndexError(f"block index {h} out of range for {form.H} blocks")
    b = form.blocks[h]
    return np.eye(form.m, dtype=complex)[b.start : b.start + b.size]


def from_upper(S_upper, spec, A=None) -> JordanForm:
    """Convert a similarity for upper-convention blocks (ones above the diagonal).

    Reversing the column order inside every block swaps the two conventions.
    """
    S = np.asarray(S_upper, dtype=complex).copy()
    start = 0
    for _, size in spec:
        S[:, start : start + size] = S[:, start : start + size][:, ::-1]
        start += size
    return JordanForm.from_blocks(S, spec, A)


def to_upper(form: JordanForm) -> np.ndarray:
    """Similarity producing upper-convention blocks from a lower-convention form."""
    S = form.S.copy()
    for b in form.blocks:
        S[:, b.start : b.start + b.size] = S[:, b.start : b.start + b.size][:, ::-1]
    return S


def _nullspace(M: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis of the ``dim`` right singular directions with smallest singular values."""
    if dim == 0:
        return np.zeros((M.shape[1], 0), dtype=complex)
    _, _, vh = np.linalg.svd(M)
    return vh[-dim:].conj().T


def _rank(M: np.ndarray, cut: float) -> int:
    if M.size == 0:
        return 0
    return int(np.sum(np.linalg.svd(M, compute_uv=False) > cut))


def _clusters(A: np.ndarray, tol: float, merge_radius: float, rank_tol: float):
    """Group eigenvalues; returns list of (centroid, algebraic multiplicity)."""
    eigs = np.linalg.eigvals(A)
    fine = _single_linkage(eigs, lambda a, b: abs(a - b) < tol * max(1.0, abs(a), abs(b)))
    nrm = max(1.0, float(np.linalg.norm(A, 2)))
    centres = [np.mean(c) for c in fine]
    coarse = _single_linkage(range(len(fine)), lambda a, b: abs(centres[a] - centres[b]) < merge_radius * nrm)
    out = []
    m = A.shape[0]
    for g in coarse:
        members = [fine[int(k)] for k in g]
        if len(members) > 1:
            pts = np.concatenate(members)
            mu, k = np.mean(pts), pts.size
            Nk = np.linalg.matrix_power(A - mu * np.eye(m), k)
            # a defective eigenvalue splits by ~eps**(1/k); accept the merge only
            # if the k-dimensional generalised eigenspace is really there
            nullity = m - _rank(Nk, rank_tol * nrm**k)
            if nullity >= k:
                out.append((complex(mu), int(k)))
                continue
        out.extend((complex(np.mean(c)), int(c.size)) for c in members)
    out.sort(key=lambda t: (round(abs(t[0]), 10), np.angle(t[0])))
    return out


def _chains(N: np.ndarray, nrm: float, rank_tol: float) -> list[list[np.ndarray]]:
    """Jordan chains ``[x, Nx, ..., N^{s-1}x]`` for a (numerically) nilpotent ``N``."""
    k = N.shape[0]
    ranks = [k]
    powers = [np.eye(k, dtype=complex)]
    for j in range(1, k + 1):
        powers.append(powers[-1] @ N)
        ranks.append(_rank(powers[-1], rank_tol * nrm**j))
    ranks[-1] = 0
    for j in range(1, k + 1):
        ranks[j] = min(ranks[j], ranks[j - 1])
    at_least = [0] + [ranks[j - 1] - ranks[j] for j in range(1, k + 1)] + [0]
    chains: list[list[np.ndarray]] = []
    chosen = np.zeros((k, 0), dtype=complex)
    for s in range(k, 0, -1):
        want = at_least[s] - at_least[s + 1]
        if want <= 0:
            continue
        Ks = _nullspace(powers[s], k - ranks[s])
        Kp = _nullspace(powers[s - 1], k - ranks[s - 1])
        comp = Ks - Kp @ (Kp.conj().T @ Ks)
        u, sv, _ = np.linalg.svd(comp, full_matrices=False)
        cands = u[:, : at_least[s]]
        got = 0
        for x in cands.T:
            chain = [x]
            for _ in range(s - 1):
                chain.append(N @ chain[-1])
            trial = np.column_stack([chosen] + chain)
            normed = trial / np.maximum(np.linalg.norm(trial, axis=0), 1e-300)
            if _rank(normed, 1e-8) == trial.shape[1]:
                chosen = trial
                chains.append(chain)
                got += 1
                if got == want:
                    break
        if got < want:
            raise JordanError(f"could not extract {want} independent Jordan chains of length {s}")
    return chains


def jordan_decompose(
    A,
    tol: float = 1e-6,
    rank_tol: float = 1e-10,
    merge_radius: float = 1e-3,
    max_residual: float = 1e-8,
) -> JordanForm:
    """Jordan form ``S^{-1} A S = J`` with lower-subdiagonal blocks.

    Eigenvalues closer than ``tol`` (relative) are clustered; clusters within
    ``merge_radius`` are merged when the generalised eigenspace confirms a
    defective eigenvalue.  Block sizes follow the rank staircase of the
    nilpotent part restricted to each generalised eigenspace.  Raises
    :class:`JordanError` if the reconstruction residual exceeds ``max_residual``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    m = A.shape[0]
    if A.shape != (m, m):
        raise ValueError("A must be square")
    nrm = max(1.0, float(np.linalg.norm(A, 2)))
    cols: list[np.ndarray] = []
    spec: list[tuple[complex, int]] = []
    for mu, k in _clusters(A, tol, merge_radius, rank_tol):
        Nfull = A - mu * np.eye(m)
        X = _nullspace(np.linalg.matrix_power(Nfull, k), k)
        Nsub = X.conj().T @ Nfull @ X
        for chain in sorted(_chains(Nsub, nrm, 1e-8), key=len, reverse=True):
            cols.extend(X @ v for v in chain)
            spec.append((mu, len(chain)))
    S = np.column_stack(cols)
    if np.linalg.matrix_rank(S) < m:
        raise JordanError("Jordan basis is singular")
    form = JordanForm.from_blocks(S, spec, A, tol)
    if not np.isfinite(form.residual) or form.residual > max_residual:
        raise JordanError(f"Jordan reconstruction residual {form.residual:.3e} exceeds {max_residual:.1e}", form.residual)
    return form
