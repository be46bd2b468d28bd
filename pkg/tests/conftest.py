"""Shared independent oracles for the test suite.

These deliberately avoid the library's own eigensolver/propagator paths:
characteristic-polynomial roots come from trace-power recursions plus
bisection, and determinants from cofactor expansion.
"""

from __future__ import annotations

import numpy as np


def charpoly_coefficients(a: np.ndarray) -> np.ndarray:
    """Coefficients of det(xI - A), highest power first (Faddeev-LeVerrier)."""
    n = a.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ m + coeffs[k - 1] * np.eye(n)
        coeffs[k] = -np.trace(a @ m) / k
    return coeffs


def bisect_eigenvalues(a: np.ndarray, grid: int = 20001, tol: float = 1e-12) -> np.ndarray:
    """All real eigenvalues of a symmetric matrix by sign-change bisection."""
    coeffs = charpoly_coefficients(a)

    def p(x):
        return np.polyval(coeffs, x)

    # Gershgorin bound on the spectrum
    r = np.max(np.sum(np.abs(a), axis=1))
    xs = np.linspace(-r - 1.0, r + 1.0, grid)
    vals = p(xs)
    roots = []
    for i in range(grid - 1):
        lo, hi = xs[i], xs[i + 1]
        flo, fhi = vals[i], vals[i + 1]
        if flo == 0.0:
            roots.append(lo)
            continue
        if flo * fhi < 0.0:
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                fm = p(mid)
                if fm == 0.0 or (hi - lo) < tol:
                    break
                if flo * fm < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(0.5 * (lo + hi))
    if vals[-1] == 0.0:
        roots.append(xs[-1])
    return np.sort(np.asarray(roots))


def cofactor_determinant(a: np.ndarray) -> float:
    """Determinant by recursive cofactor expansion (small matrices only)."""
    n = a.shape[0]
    if n == 1:
        return float(a[0, 0])
    total = 0.0
    rest = a[1:, :]
    for j in range(n):
        minor = np.delete(rest, j, axis=1)
        total += ((-1.0) ** j) * a[0, j] * cofactor_determinant(minor)
    return total


def random_symmetric(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    b = rng.normal(size=(n, n)) * scale
    m = b + b.T
    return 0.5 * (m + m.T)  # exact symmetry bit-for-bit


def random_chain_config(rng: np.random.Generator):
    """Random chain in the documented test distribution: K in 1..6,
    log-uniform couplings in [2^-10, 2^-2], capacities in [0.5, 8]."""
    from synapse_cascade import ChainConfig

    k = int(rng.integers(1, 7))
    caps = rng.uniform(0.5, 8.0, size=k)
    gs = 2.0 ** rng.uniform(-10.0, -2.0, size=k - 1) if k > 1 else []
    return ChainConfig(caps, gs)
