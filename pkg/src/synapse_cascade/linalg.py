"""Dense symmetric eigensolver and small-matrix helpers.

Matrices here are small (chain operators are rarely bigger than 6x6, PCA
covariances stay under 64x64), so a cyclic Jacobi sweep is used instead of a
library call: it is unconditionally stable on symmetric input, has no
platform-dependent branching, and therefore returns bit-identical output for
identical input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalFailure

MAX_DIM = 64
DEFAULT_MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


def validate_symmetric(m: np.ndarray) -> np.ndarray:
    """Check a matrix is square, finite, and symmetric exactly as stored."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[0] > MAX_DIM:
        raise InvalidInputError(f"matrix dim must be in 1..{MAX_DIM}, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    if not np.array_equal(a, a.T):
        raise InvalidInputError("matrix is not symmetric")
    return a


def eig_sym(m: np.ndarray, max_sweeps: int = DEFAULT_MAX_SWEEPS) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Eigenvalues are sorted ascending (stable tie order); each eigenvector's
    first component of non-negligible size is made positive so repeated runs
    and near-duplicate inputs decompose reproducibly.
    """
    a = validate_symmetric(m).copy()
    n = a.shape[0]
    v = np.eye(n)
    scale = np.max(np.abs(a))
    # Off-diagonal target: small enough that the reconstruction error stays
    # far below the 1e-10 * max|H| contract.
    tol = 1e-15 * scale

    converged = scale == 0.0 or n == 1
    sweeps = 0
    while not converged:
        if sweeps >= max_sweeps:
            raise NumericalFailure(
                f"Jacobi sweep cap reached ({max_sweeps}) without convergence"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0 or abs(apq) <= tol / n:
                    continue
                app, aqq = a[p, p], a[q, q]
                theta = (aqq - app) / (2.0 * apq)
                t = np.sign(theta) if theta != 0.0 else 1.0
                t = t / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0

                idx = np.ones(n, dtype=bool)
                idx[p] = False
                idx[q] = False
                aip = a[idx, p].copy()
                aiq = a[idx, q].copy()
                a[idx, p] = c * aip - s * aiq
                a[idx, q] = s * aip + c * aiq
                a[p, idx] = a[idx, p]
                a[q, idx] = a[idx, q]

                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        sweeps += 1
        off = 0.0
        for p in range(n - 1):
            row = np.max(np.abs(a[p, p + 1 :]))
            off = max(off, row)
        converged = off <= tol

    lam = np.diag(a).copy()
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    v = v[:, order]
    _fix_signs(v)
    lam.setflags(write=False)
    v.setflags(write=False)
    return EigenDecomposition(eigenvalues=lam, eigenvectors=v)


def _fix_signs(v: np.ndarray) -> None:
    # First component larger than 1e-12 decides the column sign (columns are
    # unit norm, so a real leading entry is at least 1/sqrt(n) >> 1e-12).
    for j in range(v.shape[1]):
        col = v[:, j]
        lead = np.flatnonzero(np.abs(col) > 1e-12)
        if lead.size and col[lead[0]] < 0.0:
            v[:, j] = -col


def top_components(cov: np.ndarray, n: int) -> np.ndarray:
    """The n eigenvectors of largest eigenvalue, as columns, descending."""
    a = validate_symmetric(cov)
    if not (1 <= n <= a.shape[0]):
        raise InvalidInputError(f"n={n} out of range for dim {a.shape[0]}")
    dec = eig_sym(a)
    cols = dec.eigenvectors[:, ::-1][:, :n].copy()
    cols.setflags(write=False)
    return cols
