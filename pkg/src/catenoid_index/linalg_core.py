"""Symmetric tridiagonal pencils: inertia, bisection eigenvalues, Steklov reduction.

Eigenvalue counts come from Sylvester's law of inertia applied to an
``LDL^T`` factorization of ``A - lam * B``. A 1x1 pivot that falls under the
zero threshold is replaced by a 2x2 block pivot whenever the coupling to the
next row is significant, so the factorization never divides by a vanishing
pivot.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, solve_banded

from .errors import InteriorSingularError, ShiftSingularError

DEFAULT_ZERO_TOL = 1e-9


@dataclass(frozen=True)
class TriMatrix:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float).ravel()
        e = np.asarray(self.offdiag, dtype=float).ravel()
        if d.size < 1:
            raise ValueError("a tridiagonal matrix needs at least one row")
        if e.size != d.size - 1:
            raise ValueError(f"offdiag has length {e.size}, expected {d.size - 1}")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def n(self) -> int:
        return self.diag.size

    @property
    def scale(self) -> float:
        s = float(np.max(np.abs(self.diag)))
        if self.offdiag.size:
            s += float(np.max(np.abs(self.offdiag)))
        return s

    def to_dense(self) -> np.ndarray:
        m = np.diag(self.diag)
        if self.n > 1:
            m += np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        return m

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[:-1] += self.offdiag * x[1:]
        y[1:] += self.offdiag * x[:-1]
        return y

    def quadratic_form(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.matvec(x))

    def combine(self, other: "TriMatrix", lam: float) -> "TriMatrix":
        """``self - lam * other``."""
        return TriMatrix(self.diag - lam * other.diag, self.offdiag - lam * other.offdiag)

    def principal(self, idx) -> "TriMatrix":
        """Principal submatrix on sorted indices (still tridiagonal)."""
        idx = np.asarray(idx, dtype=int)
        d = self.diag[idx]
        if idx.size < 2:
            return TriMatrix(d, np.empty(0))
        e = np.where(np.diff(idx) == 1, self.offdiag[idx[:-1]], 0.0)
        return TriMatrix(d, e)

    def banded(self) -> np.ndarray:
        ab = np.zeros((3, self.n))
        ab[0, 1:] = self.offdiag
        ab[1] = self.diag
        ab[2, :-1] = self.offdiag
        return ab


class BKind(enum.Enum):
    POS_DEF = "pos_def"
    BOUNDARY_SEMIDEF = "boundary_semidef"


@dataclass(frozen=True)
class Inertia:
    n_neg: int
    n_zero: int
    n_pos: int

    @property
    def dim(self) -> int:
        return self.n_neg + self.n_zero + self.n_pos

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n_neg, self.n_zero, self.n_pos)


@dataclass(frozen=True)
class TriPencil:
    A: TriMatrix
    B: TriMatrix
    b_kind: BKind = BKind.POS_DEF
    boundary_idx: tuple[int, ...] = ()

    def __post_init__(self):
        if self.A.n != self.B.n:
            raise ValueError("A and B must have the same dimension")

    @property
    def n(self) -> int:
        return self.A.n

    def validate(self) -> None:
        """Check the structural invariant attached to ``b_kind``."""
        if self.b_kind is BKind.POS_DEF:
            inertia = ldlt_inertia(self.B)
            if inertia.n_pos != self.B.n:
                raise ValueError(f"B is not positive definite: inertia {inertia.as_tuple()}")
        else:
            mask = np.zeros(self.n, dtype=bool)
            mask[list(self.boundary_idx)] = True
            if np.any(self.B.diag[~mask] != 0.0):
                raise ValueError("B has diagonal entries off the boundary indices")
            if np.any(self.B.offdiag != 0.0):
                raise ValueError("boundary-supported B must be diagonal")


def _classify(x: float, thresh: float, counts: list[int]) -> None:
    if x < -thresh:
        counts[0] += 1
    elif x > thresh:
        counts[2] += 1
    else:
        counts[1] += 1


def ldlt_inertia(M: TriMatrix, zero_tol: float = DEFAULT_ZERO_TOL) -> Inertia:
    """Inertia of a symmetric tridiagonal matrix from its ``LDL^T`` pivots.

    Pivots with magnitude at most ``zero_tol * scale`` count as zero, where
    ``scale = max|diag| + max|offdiag|``.
    """
    if not (0.0 < zero_tol <= 1e-4):
        raise ValueError(f"zero_tol must lie in (0, 1e-4], got {zero_tol}")
    d = M.diag.tolist()
    e = M.offdiag.tolist()
    n = len(d)
    scale = M.scale
    thresh = zero_tol * scale if scale > 0.0 else 0.0
    counts = [0, 0, 0]
    fill = 0.0
    i = 0
    while i < n:
        piv = d[i] - fill
        small = abs(piv) <= thresh
        if not small or i == n - 1 or abs(e[i]) <= thresh:
            _classify(piv, thresh, counts)
            fill = (e[i] * e[i] / piv) if (i < n - 1 and not small) else 0.0
            i += 1
            continue
        # 2x2 block pivot on rows i, i+1
        b11, b12, b22 = piv, e[i], d[i + 1]
        mean = 0.5 * (b11 + b22)
        rad = math.hypot(0.5 * (b11 - b22), b12)
        _classify(mean - rad, thresh, counts)
        _classify(mean + rad, thresh, counts)
        det = b11 * b22 - b12 * b12
        if i + 2 < n:
            fill = e[i + 1] * e[i + 1] * b11 / det if det != 0.0 else 0.0
        i += 2
    return Inertia(*counts)


def dense_inertia(matrix: np.ndarray, threshold: float) -> Inertia:
    """Inertia of a small dense symmetric matrix with an absolute zero band."""
    mu = np.linalg.eigvalsh(0.5 * (matrix + matrix.T))
    return Inertia(int(np.sum(mu < -threshold)), int(np.sum(np.abs(mu) <= threshold)), int(np.sum(mu > threshold)))


def _require_posdef(P: TriPencil) -> None:
    if P.b_kind is not BKind.POS_DEF:
        raise ValueError("operation requires a pencil with positive definite B")


def pencil_count_below(P: TriPencil, lam: float, zero_tol: float = DEFAULT_ZERO_TOL) -> int:
    """Number of pencil eigenvalues strictly below ``lam``.

    Raises ShiftSingularError when ``A - lam B`` has a pivot inside the zero
    band; the caller should retry with a perturbed shift.
    """
    _require_posdef(P)
    if lam == -math.inf:
        return 0
    if lam == math.inf:
        return P.n
    inertia = ldlt_inertia(P.A.combine(P.B, lam), zero_tol)
    if inertia.n_zero:
        raise ShiftSingularError(lam, inertia.n_zero)
    return inertia.n_neg


def _count_strict(P: TriPencil, lam: float) -> int:
    # zero pivots are treated as "not below"; used only inside bisection
    return ldlt_inertia(P.A.combine(P.B, lam), 1e-15).n_neg


def spectral_bounds(P: TriPencil) -> tuple[float, float]:
    """An interval containing every pencil eigenvalue."""
    _require_posdef(P)
    if np.all(P.B.offdiag == 0.0):
        w = 1.0 / np.sqrt(P.B.diag)
        c_diag = P.A.diag * w**2
        c_off = np.abs(P.A.offdiag) * w[:-1] * w[1:]
        radius = np.zeros(P.n)
        radius[:-1] += c_off
        radius[1:] += c_off
        lo, hi = float(np.min(c_diag - radius)), float(np.max(c_diag + radius))
        pad = 1e-8 * max(abs(lo), abs(hi), 1.0)
        return lo - pad, hi + pad
    lo, hi = -1.0, 1.0
    while _count_strict(P, lo) > 0:
        lo *= 2.0
    while _count_strict(P, hi) < P.n:
        hi *= 2.0
    return lo, hi


def pencil_eigs(P: TriPencil, k: int, tol: float = 1e-10) -> np.ndarray:
    """The ``k`` smallest pencil eigenvalues by bisection on the inertia count."""
    _require_posdef(P)
    if k < 0 or k > P.n:
        raise ValueError(f"k must lie in [0, {P.n}]")
    if k == 0:
        return np.empty(0)
    lo0, hi0 = spectral_bounds(P)
    out = np.empty(k)
    lo_start = lo0
    for j in range(k):
        lo, hi = lo_start, hi0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if _count_strict(P, mid) <= j:
                lo = mid
            else:
                hi = mid
        # a repeated eigenvalue is bracketed twice; keep the estimates sorted
        out[j] = max(0.5 * (lo + hi), out[j - 1]) if j else 0.5 * (lo + hi)
        lo_start = lo
    return out


def pencil_eigvec(P: TriPencil, lam: float, iterations: int = 4) -> np.ndarray:
    """Eigenvector for an eigenvalue estimate ``lam`` by shifted inverse iteration."""
    shift = lam - 1e-9 * max(abs(lam), 1.0)
    M = P.A.combine(P.B, shift)
    ab = M.banded()
    x = np.ones(P.n) / math.sqrt(P.n)
    for _ in range(iterations):
        rhs = P.B.matvec(x)
        if P.b_kind is BKind.BOUNDARY_SEMIDEF and not np.any(rhs):
            rhs = x
        x = solve_banded((1, 1), ab, rhs)
        x /= np.linalg.norm(x)
    i = int(np.argmax(np.abs(x)))
    return x * np.sign(x[i])


@dataclass(frozen=True)
class SteklovReduction:
    """Dense pencil on the boundary indices (the discrete Dirichlet-to-Neumann map)."""

    S: np.ndarray
    B: np.ndarray
    boundary_idx: tuple[int, ...]

    def eigenvalues(self) -> np.ndarray:
        return eigh(self.S, self.B, eigvals_only=True)


def _split(P: TriPencil, boundary_idx) -> tuple[np.ndarray, np.ndarray]:
    bidx = np.array(sorted(set(int(i) for i in boundary_idx)))
    if bidx.size == 0 or bidx.min() < 0 or bidx.max() >= P.n:
        raise ValueError("invalid boundary indices")
    interior = np.setdiff1d(np.arange(P.n), bidx)
    return bidx, interior


def _coupling(A: TriMatrix, bidx: np.ndarray, interior: np.ndarray) -> np.ndarray:
    dense_cols = np.zeros((interior.size, bidx.size))
    pos = {int(g): loc for loc, g in enumerate(interior)}
    for c, b in enumerate(bidx):
        for nb in (b - 1, b + 1):
            if nb in pos:
                dense_cols[pos[nb], c] = A.offdiag[min(b, nb)]
    return dense_cols


def steklov_reduce(P: TriPencil, boundary_idx, zero_tol: float = DEFAULT_ZERO_TOL) -> SteklovReduction:
    """Schur complement of ``A`` onto the boundary indices.

    Raises InteriorSingularError if the interior block has a zero pivot,
    i.e. the Dirichlet problem at zero has a kernel.
    """
    bidx, interior = _split(P, boundary_idx)
    A_bb = _dense_block(P.A, bidx)
    B_bb = _dense_block(P.B, bidx)
    if interior.size == 0:
        return SteklovReduction(A_bb, B_bb, tuple(int(i) for i in bidx))
    A_ii = P.A.principal(interior)
    inertia = ldlt_inertia(A_ii, zero_tol)
    if inertia.n_zero:
        raise InteriorSingularError(f"interior block has {inertia.n_zero} zero pivot(s)")
    A_ib = _coupling(P.A, bidx, interior)
    X = solve_banded((1, 1), A_ii.banded(), A_ib)
    S = A_bb - A_ib.T @ X
    return SteklovReduction(0.5 * (S + S.T), B_bb, tuple(int(i) for i in bidx))


def harmonic_extension(P: TriPencil, boundary_idx, boundary_values) -> np.ndarray:
    """Solve ``A x = 0`` on interior rows with prescribed boundary entries."""
    bidx, interior = _split(P, boundary_idx)
    x = np.zeros(P.n)
    x[bidx] = np.asarray(boundary_values, dtype=float)
    if interior.size:
        A_ib = _coupling(P.A, bidx, interior)
        x[interior] = solve_banded((1, 1), P.A.principal(interior).banded(), -A_ib @ x[bidx])
    return x


def _dense_block(M: TriMatrix, idx: np.ndarray) -> np.ndarray:
    out = np.zeros((idx.size, idx.size))
    for r, i in enumerate(idx):
        for c, j in enumerate(idx):
            if i == j:
                out[r, c] = M.diag[i]
            elif abs(i - j) == 1:
                out[r, c] = M.offdiag[min(i, j)]
    return out
