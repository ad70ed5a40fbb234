"""Matrix abstractions, test-matrix generators and dense SPSD kernels.

The central object is :class:`MatrixHandle`, an entry oracle for a (possibly
implicit) symmetric positive semidefinite matrix.  Algorithms in this package
only touch a handle through ``entry``/``diagonal``/``column``/``matvec`` so
that large matrices never have to be formed; every oracle call is counted so
benchmark output can report entry-evaluation costs.

Dense symmetric matrices are plain ``float64`` numpy arrays, symmetrized on
ingestion.  Cholesky factors are upper-triangular arrays ``R`` with
``R.T @ R`` reproducing the factored matrix.
"""

from __future__ import annotations

import threading
from typing import Callable, NamedTuple

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    CholeskyDowndateError,
    NotPositiveDefiniteError,
    SingularPivotBlockError,
)

__all__ = [
    "MatrixHandle",
    "ResidualNorms",
    "make_test_matrix",
    "cholesky",
    "chol_rank1_modify",
    "whiten",
    "residual_norms",
    "symmetrize",
    "zero_pivot_threshold",
    "save_dense_text",
    "load_dense_text",
]

_EPS = np.finfo(np.float64).eps


def symmetrize(a):
    """Return the symmetric part ``(a + a.T) / 2`` as a float64 array."""
    a = np.asarray(a, dtype=np.float64)
    return 0.5 * (a + a.T)


def zero_pivot_threshold(n, max_diag):
    """Scaled machine-precision threshold below which a pivot counts as zero."""
    return n * _EPS * max(max_diag, 0.0)


class MatrixHandle:
    """Entry oracle for an (implicitly defined) symmetric matrix.

    Parameters
    ----------
    n : int
        Matrix dimension.
    entry : callable, optional
        ``entry(i, j) -> float`` for 0-based indices.
    column : callable, optional
        Vectorized ``column(j) -> ndarray`` of length ``n``.  Derived from
        ``entry`` when omitted.
    diagonal : callable, optional
        ``diagonal() -> ndarray``.  Derived from ``entry`` when omitted.
    matvec : callable, optional
        ``matvec(x) -> ndarray``.  Falls back to column assembly.
    dense : ndarray, optional
        Dense symmetric storage; when given the other oracles default to
        array access and ``is_explicit`` is True.

    Notes
    -----
    Oracles must be pure; the evaluation counter is the only mutable state
    and is updated under a lock so concurrent readers stay consistent.
    """

    def __init__(self, n, entry=None, column=None, diagonal=None, matvec=None,
                 dense=None):
        if n < 1:
            raise ValueError(f"dimension must be positive, got {n}")
        self.n = int(n)
        self._dense = None
        if dense is not None:
            dense = symmetrize(dense)
            if dense.shape != (self.n, self.n):
                raise ValueError(f"dense storage has shape {dense.shape}, expected {(n, n)}")
            self._dense = dense
        elif entry is None and column is None:
            raise ValueError("need an entry oracle, a column oracle or dense storage")
        self._entry = entry
        self._column = column
        self._diagonal = diagonal
        self._matvec = matvec
        self._count = 0
        self._lock = threading.Lock()

    @classmethod
    def from_dense(cls, a):
        """Wrap a dense symmetric array (symmetrized on ingest)."""
        return cls(np.asarray(a).shape[0], dense=a)

    @property
    def is_explicit(self):
        return self._dense is not None

    @property
    def entry_count(self):
        """Number of entry evaluations performed through this handle."""
        return self._count

    def reset_entry_count(self):
        with self._lock:
            self._count = 0

    def _charge(self, k):
        with self._lock:
            self._count += k

    def entry(self, i, j):
        """Evaluate a single entry (counts as one evaluation)."""
        self._charge(1)
        if self._dense is not None:
            return float(self._dense[i, j])
        if self._entry is not None:
            return float(self._entry(i, j))
        return float(self._column(j)[i])

    def column(self, j):
        """Evaluate column ``j`` (counts as ``n`` evaluations)."""
        self._charge(self.n)
        if self._dense is not None:
            return self._dense[:, j].copy()
        if self._column is not None:
            return np.asarray(self._column(j), dtype=np.float64)
        return np.array([self._entry(i, j) for i in range(self.n)], dtype=np.float64)

    def diagonal(self):
        """Evaluate the diagonal (counts as ``n`` evaluations)."""
        self._charge(self.n)
        if self._dense is not None:
            return np.diagonal(self._dense).copy()
        if self._diagonal is not None:
            return np.asarray(self._diagonal(), dtype=np.float64)
        return np.array([self._entry(i, i) for i in range(self.n)], dtype=np.float64)

    def matvec(self, x):
        """Matrix-vector product (not charged when explicit storage exists)."""
        x = np.asarray(x, dtype=np.float64)
        if self._dense is not None:
            return self._dense @ x
        if self._matvec is not None:
            return np.asarray(self._matvec(x), dtype=np.float64)
        self._charge(self.n * self.n)
        out = np.zeros(self.n)
        for j in range(self.n):
            if self._column is not None:
                col = np.asarray(self._column(j), dtype=np.float64)
            else:
                col = np.array([self._entry(i, j) for i in range(self.n)])
            out += col * x[j]
        return out

    def to_dense(self):
        """Realize the matrix densely (charges ``n**2`` when implicit)."""
        if self._dense is not None:
            return self._dense.copy()
        cols = [self.column(j) for j in range(self.n)]
        return symmetrize(np.column_stack(cols))

    def minus_low_rank(self, w):
        """Handle for ``A - w @ w.T`` sharing this handle's oracles and counter."""
        w = np.atleast_2d(np.asarray(w, dtype=np.float64))
        if w.shape[0] != self.n:
            w = w.T
        base = self

        def entry(i, j):
            return base.entry(i, j) - float(w[i] @ w[j])

        def column(j):
            return base.column(j) - w @ w[j]

        def diagonal():
            return base.diagonal() - np.einsum("ij,ij->i", w, w)

        def matvec(x):
            return base.matvec(x) - w @ (w.T @ x)

        # Oracle calls on the derived handle also charge the base handle,
        # which is where the benchmark accounting of A is read from.
        return MatrixHandle(self.n, entry=entry, column=column,
                            diagonal=diagonal, matvec=matvec)


def as_handle(a):
    """Coerce an array or handle into a :class:`MatrixHandle`."""
    if isinstance(a, MatrixHandle):
        return a
    return MatrixHandle.from_dense(a)


def _tridiag_band(m, sub, diag, sup):
    """Entry lookup for an ``m x m`` tridiagonal Toeplitz matrix."""
    def look(a, b):
        d = a - b
        if d == 0:
            return diag
        if d == 1:
            return sub
        if d == -1:
            return sup
        return 0.0
    return look


def make_test_matrix(kind, n, rho=None):
    """Build one of the five benchmark SPSD matrices.

    The defining formulas are 1-based exactly as usually printed; the handle
    API stays 0-based and the shift happens here at the generator boundary.

    ``A1``: ``exp(-0.3 |i - j| / n)``  (subexponential spectral decay)
    ``A2``: ``min(i, j)``
    ``A3``: Hilbert matrix ``1 / (i + j - 1)``
    ``A4``: ``trid(1,1,1) (x) Id_6 + Id_{n/6} (x) trid(-0.34, 1.7, -0.34)``,
        banded and well conditioned; requires ``n`` divisible by 6
    ``A5``: ``Q diag(rho**(i-1)) Q.T`` with the closed-form sine eigenbasis
        of ``trid(-1, 2, -1)``; built explicitly and requires ``rho`` in (0, 1)

    ``A1`` through ``A4`` are lazy handles; ``A5`` is dense.
    """
    kind = kind.upper()
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    idx = np.arange(1, n + 1, dtype=np.float64)  # 1-based coordinates

    if kind == "A1":
        return MatrixHandle(
            n,
            entry=lambda i, j: np.exp(-0.3 * abs(i - j) / n),
            column=lambda j: np.exp(-0.3 * np.abs(idx - (j + 1)) / n),
            diagonal=lambda: np.ones(n),
        )
    if kind == "A2":
        return MatrixHandle(
            n,
            entry=lambda i, j: float(min(i, j) + 1),
            column=lambda j: np.minimum(idx, j + 1.0),
            diagonal=lambda: idx.copy(),
        )
    if kind == "A3":
        return MatrixHandle(
            n,
            entry=lambda i, j: 1.0 / (i + j + 1),
            column=lambda j: 1.0 / (idx + j),
            diagonal=lambda: 1.0 / (2.0 * idx - 1.0),
        )
    if kind == "A4":
        if n % 6 != 0:
            raise ValueError(f"A4 needs n divisible by 6, got {n}")
        outer = _tridiag_band(n // 6, 1.0, 1.0, 1.0)
        inner = _tridiag_band(6, -0.34, 1.7, -0.34)
        blk = np.arange(n) // 6
        pos = np.arange(n) % 6

        def entry(i, j):
            return (outer(i // 6, j // 6) * (i % 6 == j % 6)
                    + (i // 6 == j // 6) * inner(i % 6, j % 6))

        def column(j):
            qj, sj = divmod(j, 6)
            col = np.where((np.abs(blk - qj) <= 1) & (pos == sj), 1.0, 0.0)
            same_block = blk == qj
            col += np.where(same_block & (pos == sj), 0.7, 0.0)  # 1.7 total on diag
            col += np.where(same_block & (np.abs(pos - sj) == 1), -0.34, 0.0)
            return col

        return MatrixHandle(
            n,
            entry=entry,
            column=column,
            diagonal=lambda: np.full(n, 2.7),
        )
    if kind == "A5":
        if rho is None:
            raise ValueError("A5 requires the spectral decay parameter rho")
        if not 0.0 < rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {rho}")
        q = np.sqrt(2.0 / (n + 1)) * np.sin(np.outer(idx, idx) * np.pi / (n + 1))
        d = rho ** np.arange(n, dtype=np.float64)
        return MatrixHandle.from_dense((q * d) @ q.T)
    raise ValueError(f"unknown test matrix kind {kind!r}")


def cholesky(s):
    """Upper-triangular Cholesky factor ``R`` with ``R.T @ R == s``.

    Raises :class:`NotPositiveDefiniteError` (with the failing column) when a
    pivot drops below ``n * eps * max(diag)``.
    """
    s = symmetrize(s)
    n = s.shape[0]
    thresh = zero_pivot_threshold(n, float(np.max(np.diagonal(s), initial=0.0)))
    r = np.zeros_like(s)
    for j in range(n):
        d = s[j, j] - r[:j, j] @ r[:j, j]
        if d <= thresh:
            raise NotPositiveDefiniteError(j)
        rjj = np.sqrt(d)
        r[j, j] = rjj
        if j + 1 < n:
            r[j, j + 1:] = (s[j, j + 1:] - r[:j, j] @ r[:j, j + 1:]) / rjj
    return r


def chol_rank1_modify(r, v, direction):
    """Cholesky factor of ``R.T @ R +/- v v.T`` in O(n^2), no refactorization.

    ``direction`` is ``"update"`` or ``"downdate"``.  A downdate that would
    leave the matrix non positive definite raises
    :class:`CholeskyDowndateError`; callers typically fall back to a full
    refactorization.
    """
    r = np.array(r, dtype=np.float64)
    v = np.array(v, dtype=np.float64)
    n = r.shape[0]
    if direction == "update":
        for k in range(n):
            rad = np.hypot(r[k, k], v[k])
            c = rad / r[k, k]
            s = v[k] / r[k, k]
            r[k, k] = rad
            if k + 1 < n:
                r[k, k + 1:] = (r[k, k + 1:] + s * v[k + 1:]) / c
                v[k + 1:] = c * v[k + 1:] - s * r[k, k + 1:]
        return r
    if direction == "downdate":
        for k in range(n):
            h2 = (r[k, k] - v[k]) * (r[k, k] + v[k])
            if h2 <= 0.0:
                raise CholeskyDowndateError(
                    f"downdate breakdown at column {k}: hypotenuse term {h2:.3e}")
            rad = np.sqrt(h2)
            c = rad / r[k, k]
            s = v[k] / r[k, k]
            r[k, k] = rad
            if k + 1 < n:
                r[k, k + 1:] = (r[k, k + 1:] - s * v[k + 1:]) / c
                v[k + 1:] = c * v[k + 1:] - s * r[k, k + 1:]
        return r
    raise ValueError(f"direction must be 'update' or 'downdate', got {direction!r}")


def whiten(a, b):
    """Congruence ``E = T_B^{-T} A T_B^{-1}`` with ``T_B`` the Cholesky factor of ``b``.

    Computed with two triangular solves; the result is symmetrized.  ``b``
    must be symmetric positive definite.
    """
    a = a.to_dense() if isinstance(a, MatrixHandle) else symmetrize(a)
    b = b.to_dense() if isinstance(b, MatrixHandle) else symmetrize(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    r = cholesky(b)
    x = solve_triangular(r, a, trans="T", lower=False)
    e = solve_triangular(r, x.T, trans="T", lower=False).T
    return symmetrize(e)


class ResidualNorms(NamedTuple):
    nuclear: float
    frobenius: float
    spectral: float
    max_abs: float


def cross_residual(a, j):
    """Dense residual ``A - A(:,J) A(J,J)^{-1} A(J,:)`` of a cross approximation."""
    a = a.to_dense() if isinstance(a, MatrixHandle) else symmetrize(a)
    j = np.asarray(j, dtype=np.intp)
    block = a[np.ix_(j, j)]
    if j.size:
        sv = np.linalg.svd(block, compute_uv=False)
        if sv[0] == 0.0 or sv[-1] <= j.size * _EPS * sv[0]:
            raise SingularPivotBlockError(
                f"pivot block of size {j.size} is numerically singular")
        w = np.linalg.solve(block, a[j, :])
        rj = a - a[:, j] @ w
    else:
        rj = a.copy()
    return symmetrize(rj)


def residual_norms(a, j):
    """Nuclear/Frobenius/spectral/max norms of the cross-approximation residual.

    Dense utility for tests and benchmarks.  For an SPSD input the returned
    values satisfy ``nuclear >= frobenius >= spectral >= nuclear / n``.
    """
    rj = cross_residual(a, j)
    lam = np.linalg.eigvalsh(rj)
    return ResidualNorms(
        nuclear=float(np.sum(np.abs(lam))),
        frobenius=float(np.linalg.norm(rj, "fro")),
        spectral=float(np.max(np.abs(lam), initial=0.0)),
        max_abs=float(np.max(np.abs(rj), initial=0.0)),
    )


def save_dense_text(path, a):
    """Write a dense matrix in the package text format.

    First line holds ``n``; each following line has ``n`` whitespace-separated
    decimal literals at full round-trip precision.
    """
    a = a.to_dense() if isinstance(a, MatrixHandle) else np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{n}\n")
        for row in a:
            fh.write(" ".join(format(x, ".17g") for x in row))
            fh.write("\n")


def load_dense_text(path):
    """Read a matrix written by :func:`save_dense_text` (symmetrized)."""
    with open(path, "r", encoding="ascii") as fh:
        first = fh.readline().split()
        if len(first) != 1:
            raise ValueError("dense text format: first line must hold the dimension")
        n = int(first[0])
        rows = []
        for line in fh:
            if line.strip():
                rows.append([float(tok) for tok in line.split()])
    a = np.array(rows, dtype=np.float64)
    if a.shape != (n, n):
        raise ValueError(f"dense text format: expected {n}x{n} entries, got {a.shape}")
    return symmetrize(a)
