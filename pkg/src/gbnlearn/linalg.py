"""Dense symmetric linear algebra used by every other module.

Thin validating wrappers around the backend kernels: Cholesky
factorization of symmetric positive definite matrices, triangular
solves, SPD inversion, and a smallest-eigenvalue routine.  Matrices are
plain float64 ``numpy.ndarray``s; symmetry is checked to an absolute
tolerance of 1e-10 and inputs are symmetrized as (A + A.T)/2 before
factorization so round-off asymmetry never changes a result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gbnlearn.backends import active_backend
from gbnlearn.errors import (
    DimensionMismatch,
    IterationLimit,
    NotPositiveDefinite,
    NotSymmetric,
)

SYMMETRY_TOL = 1e-10

_JACOBI_SWEEPS = 60


def _as_square(a, name: str = "matrix") -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def _symmetrized(a, name: str = "matrix") -> np.ndarray:
    m = _as_square(a, name)
    gap = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if gap > SYMMETRY_TOL:
        raise NotSymmetric(f"{name} is not symmetric: max |A - A.T| = {gap:.3e}")
    return (m + m.T) * 0.5


@dataclass(frozen=True)
class SpdFactorization:
    """Lower-triangular Cholesky factor L with A = L L.T."""

    n: int
    lower: np.ndarray


def cholesky(a) -> SpdFactorization:
    """Factor a symmetric positive definite matrix.

    Raises
    ------
    NotSymmetric
        If max |A - A.T| exceeds 1e-10.
    NotPositiveDefinite
        If a pivot falls below tolerance; carries the pivot index.
    """
    m = _symmetrized(a)
    n = m.shape[0]
    ptol = 1e-13 * max(0.0, float(np.max(np.diag(m)))) if n else 0.0
    L, info = active_backend().chol_factor(m, ptol)
    if info >= 0:
        raise NotPositiveDefinite(
            f"matrix is not positive definite: pivot {info} <= {ptol:.3e}",
            pivot_index=int(info),
        )
    return SpdFactorization(n=n, lower=L)


def solve_spd(f: SpdFactorization, b) -> np.ndarray:
    """Solve A x = b given the factorization of A."""
    v = np.asarray(b, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != f.n:
        raise DimensionMismatch(
            f"right-hand side has shape {v.shape}, expected ({f.n},)"
        )
    return active_backend().chol_solve(f.lower, v)


def invert_spd(a) -> np.ndarray:
    """Explicit inverse of a symmetric positive definite matrix.

    The result is symmetrized before returning.  Prefer `solve_spd` when
    only products with the inverse are needed.
    """
    f = cholesky(a)
    inv = active_backend().chol_inverse(f.lower)
    return (inv + inv.T) * 0.5


def min_eigenvalue(a, tol: float = 1e-9) -> float:
    """Smallest eigenvalue of a symmetric matrix, to absolute accuracy tol."""
    m = _symmetrized(a)
    if m.shape[0] == 0:
        raise DimensionMismatch("matrix is empty")
    val, info = active_backend().min_eig(m, tol, _JACOBI_SWEEPS)
    if info != 0:
        raise IterationLimit(
            f"eigenvalue iteration did not converge within {_JACOBI_SWEEPS} sweeps"
        )
    return float(val)
