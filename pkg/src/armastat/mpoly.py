"""Complex scalar and matrix polynomials in one variable.

Coefficients are stored in ascending powers of ``z``.  Zero tests are always
relative to the largest coefficient magnitude of the operands involved.
"""
from __future__ import annotations

from itertools import product

import numpy as np
import numpy.polynomial.polynomial as npoly

DEFAULT_ZERO_TOL = 1e-9
# interpolated determinants/adjugates carry ~1e-16 noise above their true degree
INTERP_TRIM_TOL = 1e-12


def _trim(c: np.ndarray, tol: float) -> np.ndarray:
    """Drop trailing coefficients that are zero relative to the largest one."""
    if c.size == 0:
        return np.zeros(1, dtype=complex)
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return np.zeros(1, dtype=complex)
    cut = tol * scale
    n = c.size
    while n > 1 and abs(c[n - 1]) <= cut:
        n -= 1
    return c[:n]


class CPoly:
    """Complex polynomial ``sum_k coeffs[k] z**k``.

    The zero polynomial has ``degree == -1``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs, tol: float = 0.0):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).ravel().copy()
        self.coeffs = _trim(c, tol)

    @classmethod
    def from_roots(cls, roots, lead: complex = 1.0) -> "CPoly":
        """Polynomial ``lead * prod (z - r)``."""
        c = np.array([lead], dtype=complex)
        for r in roots:
            c = npoly.polymul(c, [-r, 1.0])
        return cls(c)

    @property
    def degree(self) -> int:
        if not np.any(self.coeffs):
            return -1
        return self.coeffs.size - 1

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def is_zero(self, tol: float = DEFAULT_ZERO_TOL, scale: float | None = None) -> bool:
        ref = self.scale if scale is None else scale
        return bool(np.max(np.abs(self.coeffs)) <= tol * ref) or self.degree < 0

    def trimmed(self, tol: float) -> "CPoly":
        return CPoly(self.coeffs, tol)

    def __call__(self, z):
        return npoly.polyval(z, self.coeffs)

    def __add__(self, other: "CPoly") -> "CPoly":
        return CPoly(npoly.polyadd(self.coeffs, _coeffs(other)))

    def __sub__(self, other: "CPoly") -> "CPoly":
        return CPoly(npoly.polysub(self.coeffs, _coeffs(other)))

    def __mul__(self, other) -> "CPoly":
        if np.isscalar(other):
            return CPoly(self.coeffs * other)
        return CPoly(npoly.polymul(self.coeffs, _coeffs(other)))

    __rmul__ = __mul__

    def __neg__(self) -> "CPoly":
        return CPoly(-self.coeffs)

    def __divmod__(self, other: "CPoly") -> tuple["CPoly", "CPoly"]:
        q, r = npoly.polydiv(self.coeffs, _coeffs(other))
        return CPoly(q), CPoly(r)

    def __repr__(self) -> str:
        return f"CPoly({np.array2string(self.coeffs, precision=6)})"

    def derivative(self) -> "CPoly":
        return CPoly(npoly.polyder(self.coeffs))

    def reversed_conj(self, degree: int | None = None) -> "CPoly":
        """``z**n * conj(p(1/conj(z)))``; equals ``z**n * conj(p(z))`` on ``|z|=1``."""
        n = self.coeffs.size - 1 if degree is None else degree
        c = np.zeros(n + 1, dtype=complex)
        c[: self.coeffs.size] = self.coeffs
        return CPoly(np.conj(c[::-1]))

    def divide_linear(self, z0: complex) -> tuple["CPoly", complex]:
        """Synthetic division by ``(z - z0)``; returns quotient and remainder."""
        c = self.coeffs
        n = c.size - 1
        if n == 0:
            return CPoly([0.0]), complex(c[0])
        q = np.empty(n, dtype=complex)
        acc = c[n]
        for k in range(n - 1, -1, -1):
            q[k] = acc
            acc = c[k] + acc * z0
        return CPoly(q), complex(acc)

    def order_at(self, z0: complex, tol: float = DEFAULT_ZERO_TOL, cap: int | None = None) -> int:
        """Order of vanishing at ``z0``, counted by repeated synthetic division.

        Each remainder is compared with the evaluation scale
        ``sum_k |c_k| |z0|**k`` of the current quotient.  An identically zero
        polynomial has infinite order, reported as ``cap`` (or a large int).
        """
        limit = cap if cap is not None else 10**9
        if self.degree < 0:
            return limit
        p = self
        order = 0
        w = max(1.0, abs(z0))
        while order < limit and p.degree >= 1:
            ref = float(np.sum(np.abs(p.coeffs) * w ** np.arange(p.coeffs.size)))
            q, r = p.divide_linear(z0)
            if abs(r) > tol * ref:
                break
            order += 1
            p = q
        return order

    def deflate(self, z0: complex, k: int) -> "CPoly":
        """Divide out ``(z - z0)**k`` discarding the (negligible) remainders."""
        p = self
        for _ in range(k):
            p, _ = p.divide_linear(z0)
        return p

    def roots(self) -> np.ndarray:
        if self.degree <= 0:
            return np.zeros(0, dtype=complex)
        return npoly.polyroots(self.coeffs).astype(complex)


def _coeffs(p) -> np.ndarray:
    if isinstance(p, CPoly):
        return p.coeffs
    return np.atleast_1d(np.asarray(p, dtype=complex))


def _trim_matrix(c: np.ndarray, tol: float) -> np.ndarray:
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return np.zeros((1,) + c.shape[1:], dtype=complex)
    n = c.shape[0]
    while n > 1 and np.max(np.abs(c[n - 1])) <= tol * scale:
        n -= 1
    return c[:n]


class MatrixPoly:
    """Matrix polynomial ``sum_k coeffs[k] z**k`` with ``coeffs`` of shape (deg+1, rows, cols)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs, tol: float = 0.0):
        c = np.array(coeffs, dtype=complex)
        if c.ndim == 2:
            c = c[None]
        if c.ndim != 3:
            raise ValueError("coefficients must have shape (deg+1, rows, cols)")
        self.coeffs = _trim_matrix(c, tol)

    @classmethod
    def identity(cls, m: int) -> "MatrixPoly":
        return cls(np.eye(m, dtype=complex))

    @classmethod
    def ar(cls, psis) -> "MatrixPoly":
        """``Id - sum_k psis[k-1] z**k``."""
        psis = np.asarray(psis, dtype=complex)
        m = psis.shape[-1]
        c = np.concatenate([np.eye(m, dtype=complex)[None], -psis], axis=0)
        return cls(c)

    @classmethod
    def from_entries(cls, entries) -> "MatrixPoly":
        """Build from a nested list of :class:`CPoly` (or coefficient arrays)."""
        rows = len(entries)
        cols = len(entries[0])
        polys = [[e if isinstance(e, CPoly) else CPoly(e) for e in row] for row in entries]
        deg = max(p.coeffs.size for row in polys for p in row)
        c = np.zeros((deg, rows, cols), dtype=complex)
        for i, j in product(range(rows), range(cols)):
            pc = polys[i][j].coeffs
            c[: pc.size, i, j] = pc
        return cls(c)

    @property
    def rows(self) -> int:
        return self.coeffs.shape[1]

    @property
    def cols(self) -> int:
        return self.coeffs.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape[1:]

    @property
    def degree(self) -> int:
        if not np.any(self.coeffs):
            return -1
        return self.coeffs.shape[0] - 1

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def __getitem__(self, k: int) -> np.ndarray:
        """Coefficient matrix of ``z**k`` (zero outside the stored range)."""
        if 0 <= k < self.coeffs.shape[0]:
            return self.coeffs[k]
        return np.zeros(self.shape, dtype=complex)

    def entry(self, i: int, j: int) -> CPoly:
        return CPoly(self.coeffs[:, i, j])

    def __call__(self, z):
        """Horner evaluation; ``z`` may be a scalar or an array of points."""
        z = np.asarray(z, dtype=complex)
        zz = z[..., None, None]
        out = np.broadcast_to(self.coeffs[-1], z.shape + self.shape).astype(complex)
        for k in range(self.coeffs.shape[0] - 2, -1, -1):
            out = out * zz + self.coeffs[k]
        return out

    def __add__(self, other: "MatrixPoly") -> "MatrixPoly":
        n = max(self.coeffs.shape[0], other.coeffs.shape[0])
        c = np.zeros((n,) + self.shape, dtype=complex)
        c[: self.coeffs.shape[0]] += self.coeffs
        c[: other.coeffs.shape[0]] += other.coeffs
        return MatrixPoly(c)

    def __neg__(self) -> "MatrixPoly":
        return MatrixPoly(-self.coeffs)

    def __sub__(self, other: "MatrixPoly") -> "MatrixPoly":
        return self + (-other)

    def __matmul__(self, other) -> "MatrixPoly":
        if not isinstance(other, MatrixPoly):
            other = np.asarray(other, dtype=complex)
            return MatrixPoly(self.coeffs @ other)
        a, b = self.coeffs, other.coeffs
        c = np.zeros((a.shape[0] + b.shape[0] - 1, self.rows, other.cols), dtype=complex)
        for i in range(a.shape[0]):
            c[i : i + b.shape[0]] += a[i] @ b
        return MatrixPoly(c)

    def __rmatmul__(self, other) -> "MatrixPoly":
        return MatrixPoly(np.asarray(other, dtype=complex) @ self.coeffs)

    def scalar_mul(self, p: CPoly) -> "MatrixPoly":
        a = self.coeffs
        c = np.zeros((a.shape[0] + p.coeffs.size - 1,) + self.shape, dtype=complex)
        for k, pk in enumerate(p.coeffs):
            c[k : k + a.shape[0]] += pk * a
        return MatrixPoly(c)

    def trimmed(self, tol: float) -> "MatrixPoly":
        return MatrixPoly(self.coeffs, tol)

    def is_zero(self, tol: float = DEFAULT_ZERO_TOL, scale: float | None = None) -> bool:
        ref = self.scale if scale is None else scale
        return bool(np.max(np.abs(self.coeffs)) <= tol * ref)

    def reversed_conj(self, degree: int | None = None) -> "MatrixPoly":
        """``sum_k C_k^* z**(n-k)``; on ``|z|=1`` this is ``z**n P(z)^*``."""
        n = self.coeffs.shape[0] - 1 if degree is None else degree
        c = np.zeros((n + 1,) + self.shape, dtype=complex)
        c[: self.coeffs.shape[0]] = self.coeffs
        return MatrixPoly(np.conj(np.swapaxes(c[::-1], 1, 2)))

    def __repr__(self) -> str:
        return f"MatrixPoly(shape={self.shape}, degree={self.degree})"


def _interp_nodes(degree_bound: int) -> np.ndarray:
    n = 1
    while n < degree_bound + 1:
        n *= 2
    return np.exp(2j * np.pi * np.arange(n) / n)


def _interpolate(values: np.ndarray, degree_bound: int) -> np.ndarray:
    """Coefficients from values at the roots of unity returned by :func:`_interp_nodes`."""
    c = np.fft.fft(values, axis=0) / values.shape[0]
    return c[: degree_bound + 1]


def det_poly(P: MatrixPoly, tol: float = INTERP_TRIM_TOL) -> CPoly:
    """Determinant of a square matrix polynomial, by interpolation on the unit circle."""
    if P.rows != P.cols:
        raise ValueError(f"det_poly needs a square matrix polynomial, got {P.shape}")
    bound = P.rows * max(P.degree, 0)
    nodes = _interp_nodes(bound)
    vals = np.linalg.det(P(nodes))
    return CPoly(_interpolate(vals, bound), tol)


def adjugate_poly(P: MatrixPoly, tol: float = INTERP_TRIM_TOL) -> MatrixPoly:
    """Adjugate (transposed cofactor matrix) of a square matrix polynomial."""
    if P.rows != P.cols:
        raise ValueError(f"adjugate_poly needs a square matrix polynomial, got {P.shape}")
    m = P.rows
    if m == 1:
        return MatrixPoly(np.ones((1, 1, 1), dtype=complex))
    bound = (m - 1) * max(P.degree, 0)
    nodes = _interp_nodes(bound)
    vals = P(nodes)
    adj = np.empty_like(vals)
    idx = np.arange(m)
    for i, j in product(range(m), range(m)):
        minor = vals[:, idx != i][:, :, idx != j]
        adj[:, j, i] = (-1) ** (i + j) * np.linalg.det(minor)
    return MatrixPoly(_interpolate(adj, bound), tol)


def _col_entry(A: np.ndarray, i: int, k: int) -> CPoly:
    return CPoly(A[:, i, k])


def _set_col(A: np.ndarray, k: int, col: np.ndarray) -> np.ndarray:
    """Write a column (shape (deg+1, rows)), growing the coefficient axis if needed."""
    if col.shape[0] > A.shape[0]:
        pad = np.zeros((col.shape[0] - A.shape[0],) + A.shape[1:], dtype=complex)
        A = np.concatenate([A, pad], axis=0)
    A[:, :, k] = 0.0
    A[: col.shape[0], :, k] = col
    return A


def _poly_times_col(q: CPoly, col: np.ndarray) -> np.ndarray:
    out = np.zeros((col.shape[0] + q.coeffs.size - 1, col.shape[1]), dtype=complex)
    for k, qk in enumerate(q.coeffs):
        out[k : k + col.shape[0]] += qk * col
    return out


def _clean(A: np.ndarray, cut: float) -> np.ndarray:
    A = A.copy()
    A[np.abs(A) <= cut] = 0.0
    return _trim_matrix(A, 0.0)


def gcld(P: MatrixPoly, Q: MatrixPoly, tol: float = DEFAULT_ZERO_TOL):
    """Greatest common left divisor of ``P`` (m x m) and ``Q`` (m x d).

    The compound ``[P Q]`` is column-compressed to ``[R 0]`` by elementary
    unimodular column operations (Euclidean division on each row with
    pivoting on degree, then on leading-coefficient magnitude).  Returns
    ``(R, P1, Q1)`` with ``P = R P1`` and ``Q = R Q1``.
    """
    if P.rows != P.cols:
        raise ValueError("P must be square")
    if Q.rows != P.rows:
        raise ValueError("P and Q must have the same number of rows")
    m, d = P.rows, Q.cols
    n = m + d
    deg = max(P.coeffs.shape[0], Q.coeffs.shape[0])
    A = np.zeros((deg, m, n), dtype=complex)
    A[: P.coeffs.shape[0], :, :m] = P.coeffs
    A[: Q.coeffs.shape[0], :, m:] = Q.coeffs
    scale = float(np.max(np.abs(A)))
    if scale == 0.0:
        raise ValueError("compound block [P Q] is identically zero")
    cut = tol * scale
    # V tracks the inverse of the accumulated column transform: [P Q] = [R 0] V
    V = np.eye(n, dtype=complex)[None]
    vscale = 1.0

    def nonzero(A, i, k):
        return np.any(np.abs(A[:, i, k]) > cut)

    for i in range(m):
        for _ in range(10_000):
            live = [k for k in range(i, n) if nonzero(A, i, k)]
            if not live:
                raise ValueError(
                    "compound block [P Q] is rank deficient for every z; no square left divisor"
                )
            if len(live) == 1 and live[0] == i:
                break
            piv = min(
                live,
                key=lambda k: (_col_entry(A, i, k).trimmed(0).degree, -abs(_lead(A, i, k, cut))),
            )
            if piv != i:
                A[:, :, [i, piv]] = A[:, :, [piv, i]]
                V[:, [i, piv], :] = V[:, [piv, i], :]
            pivot = CPoly(np.where(np.abs(A[:, i, i]) > cut, A[:, i, i], 0.0))
            for k in range(i + 1, n):
                if not nonzero(A, i, k):
                    A[:, i, k] = 0.0
                    continue
                entry = CPoly(np.where(np.abs(A[:, i, k]) > cut, A[:, i, k], 0.0))
                quo, _ = divmod(entry, pivot)
                newcol = np.zeros((max(A.shape[0], quo.coeffs.size + A.shape[0] - 1), m), dtype=complex)
                newcol[: A.shape[0]] = A[:, :, k]
                prod = _poly_times_col(quo, A[:, :, i])
                newcol[: prod.shape[0]] -= prod
                A = _set_col(A, k, newcol)
                # inverse op on V: row_i += quo * row_k
                vrow = np.zeros((max(V.shape[0], quo.coeffs.size + V.shape[0] - 1), n), dtype=complex)
                vrow[: V.shape[0]] = V[:, i, :]
                vp = _poly_times_col(quo, V[:, k, :])
                vrow[: vp.shape[0]] += vp
                if vrow.shape[0] > V.shape[0]:
                    V = np.concatenate(
                        [V, np.zeros((vrow.shape[0] - V.shape[0], n, n), dtype=complex)], axis=0
                    )
                V[:, i, :] = vrow
                A = _clean(A, cut)
                vscale = max(vscale, float(np.max(np.abs(V))))
                V = _clean(V, tol * 1e-3 * vscale)
        else:  # pragma: no cover - defensive
            raise RuntimeError("column reduction did not terminate")
    R = MatrixPoly(A[:, :, :m])
    P1 = MatrixPoly(V[:, :m, :m])
    Q1 = MatrixPoly(V[:, :m, m:])
    return R, P1, Q1


def _lead(A: np.ndarray, i: int, k: int, cut: float) -> complex:
    c = A[:, i, k]
    nz = np.nonzero(np.abs(c) > cut)[0]
    return complex(c[nz[-1]]) if nz.size else 0.0


def is_unimodular(R: MatrixPoly, tol: float = DEFAULT_ZERO_TOL) -> bool:
    """True iff ``det R(z)`` is a nonzero constant (relative to its coefficient scale)."""
    if R.rows != R.cols:
        raise ValueError("R must be square")
    det = det_poly(R, tol=0.0)
    c = det.coeffs
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return False
    return bool(np.all(np.abs(c[1:]) <= tol * scale)) and abs(c[0]) > tol * scale


def are_left_coprime(P: MatrixPoly, Q: MatrixPoly, tol: float = DEFAULT_ZERO_TOL) -> bool:
    R, _, _ = gcld(P, Q, tol)
    return is_unimodular(R, tol)


def roots_with_multiplicity(
    p: CPoly, tol: float = 1e-7, merge_radius: float | None = None
) -> list[tuple[complex, int]]:
    """Roots of ``p`` grouped into clusters, with cluster sizes as multiplicities.

    Roots closer than ``tol * max(1, |z|)`` are merged.  If ``merge_radius`` is
    given, groups of roots within that radius are also merged, but only when
    ``p`` vanishes at the group centroid to the full order of the group
    (multiple roots computed in floating point split by ``eps**(1/k)``).
    """
    if p.degree < 0:
        raise ValueError("zero polynomial has no well-defined roots")
    r = p.roots()
    if r.size == 0:
        return []
    clusters = _single_linkage(r, lambda a, b: abs(a - b) < tol * max(1.0, abs(a), abs(b)))
    if merge_radius is not None and len(clusters) > 1:
        centres = np.array([np.mean(c) for c in clusters])
        groups = _single_linkage(
            np.arange(len(clusters)),
            lambda a, b: abs(centres[int(a)] - centres[int(b)]) < merge_radius,
        )
        merged = []
        for g in groups:
            members = [clusters[int(k)] for k in g]
            if len(members) == 1:
                merged.append(members[0])
                continue
            pts = np.concatenate(members)
            if p.order_at(np.mean(pts), cap=pts.size) >= pts.size:
                merged.append(pts)
            else:
                merged.extend(members)
        clusters = merged
    out = [(complex(np.mean(c)), int(len(c))) for c in clusters]
    out.sort(key=lambda t: (abs(t[0]), np.angle(t[0])))
    return out


def _single_linkage(items, close) -> list[np.ndarray]:
    items = list(items)
    n = len(items)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in range(n):
        for b in range(a + 1, n):
            if close(items[a], items[b]):
                parent[find(a)] = find(b)
    groups: dict[int, list] = {}
    for a in range(n):
        groups.setdefault(find(a), []).append(items[a])
    return [np.array(g) for g in groups.values()]
