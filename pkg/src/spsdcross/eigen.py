"""Symmetric eigendecomposition helpers.

Dense problems go to LAPACK; the structured path used inside the certified
cross approximation is a bulge-chasing tridiagonalization of
diagonal-minus-rank-1 matrices followed by a Cuppen-style divide-and-conquer
eigenvalue solver, plus stable characteristic-polynomial coefficients
accumulated one eigenvalue at a time.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import _kernels
from .matrices import symmetrize

__all__ = ["TridiagSym", "sym_eig", "tridiagonalize_dpr1", "tridiag_eig",
           "charpoly_from_eigs"]


class TridiagSym(NamedTuple):
    """Symmetric tridiagonal matrix: diagonal ``d`` and off-diagonal ``e``."""

    d: np.ndarray
    e: np.ndarray


def sym_eig(s):
    """Eigendecomposition of a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    orthonormal eigenvector columns.
    """
    return np.linalg.eigh(symmetrize(s))


def tridiagonalize_dpr1(lam, u):
    """Reduce ``diag(lam) - u u.T`` to tridiagonal form by bulge chasing.

    The transform is an orthogonal similarity, so eigenvalues are preserved;
    O(n^2) Givens rotations in total.  Inputs of size <= 2 are already
    tridiagonal and come back unrotated.
    """
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    if lam.shape != u.shape or lam.ndim != 1:
        raise ValueError("lam and u must be 1-d arrays of equal length")
    n = lam.size
    if n == 0:
        raise ValueError("empty input")
    if n == 1:
        return TridiagSym(lam - u * u, np.zeros(0))
    if n == 2:
        d = lam - u * u
        return TridiagSym(d, np.array([-u[0] * u[1]]))
    d, e = _kernels.chase_dpr1(lam, u)
    return TridiagSym(d, e)


def tridiag_eig(t, e=None):
    """Eigenvalues of a symmetric tridiagonal matrix, ascending.

    Accepts a :class:`TridiagSym` or separate ``(d, e)`` arrays.  Negligible
    off-diagonal entries split the problem; each unreduced block is solved by
    divide and conquer with secular-equation root finding.
    """
    if e is None:
        d, e = t
    else:
        d = t
    d = np.ascontiguousarray(d, dtype=np.float64)
    e = np.ascontiguousarray(e, dtype=np.float64)
    n = d.size
    if e.size != max(n - 1, 0):
        raise ValueError(f"off-diagonal has length {e.size}, expected {n - 1}")
    if n == 0:
        return np.zeros(0)
    if n == 1:
        return d.copy()
    return _kernels.tridiag_eigvalues(d, e)


def charpoly_from_eigs(eigenvalues):
    """Elementary symmetric polynomial coefficients of the eigenvalues.

    ``e[k]`` is the k-th elementary symmetric polynomial (``e[0] = 1``,
    ``e[n]`` the product), built by the one-eigenvalue-at-a-time recurrence
    ``e_k <- e_k + lam * e_{k-1}``.  With nonnegative inputs the recurrence
    never subtracts, so every coefficient is computed stably and stays >= 0.
    """
    lam = np.asarray(eigenvalues, dtype=np.float64).ravel()
    n = lam.size
    e = np.zeros(n + 1)
    e[0] = 1.0
    for v in lam:
        e[1:] += v * e[:-1]
    return e
