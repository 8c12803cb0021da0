"""Empirical second moments and support-restricted least squares.

The model is zero-mean, so the default covariance is the uncentered
(1/n) X.T X; an optional centering flag subtracts column means first
(still dividing by n).  The result is symmetrized explicitly so exact
symmetry can be relied on downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from gbnlearn import linalg
from gbnlearn.errors import DimensionMismatch, NotPositiveDefinite, SingularSupport


@dataclass(frozen=True, eq=False)
class EmpiricalCovariance:
    """Second-moment matrix with the sample count it came from."""

    sigma_n: np.ndarray
    n: int


def empirical_covariance(x, center: bool = False) -> EmpiricalCovariance:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch(f"data must be 2-D (rows = samples), got shape {x.shape}")
    n = x.shape[0]
    if n < 1:
        raise ValueError("need at least one sample")
    if not np.all(np.isfinite(x)):
        raise ValueError("data contains non-finite entries")
    if center:
        x = x - x.mean(axis=0, keepdims=True)
    s = (x.T @ x) / n
    return EmpiricalCovariance(sigma_n=(s + s.T) * 0.5, n=n)


def ols_on_support(cov: EmpiricalCovariance, i: int, support: Sequence[int]) -> np.ndarray:
    """Regression coefficients of node i on the given support set.

    Solves Sigma_n[S, S] theta = Sigma_n[S, i] through the SPD
    factorization.  An empty support returns an empty vector.

    Raises
    ------
    SingularSupport
        If the support submatrix is not numerically positive definite;
        carries the failing pivot index (within the support).
    """
    s = [int(j) for j in support]
    p = cov.sigma_n.shape[0]
    if not (0 <= i < p):
        raise ValueError(f"node {i} out of range for p = {p}")
    if i in s:
        raise ValueError(f"support of node {i} must not contain itself")
    if len(set(s)) != len(s):
        raise ValueError("support contains duplicates")
    if len(s) == 0:
        return np.zeros(0)
    sub = cov.sigma_n[np.ix_(s, s)]
    rhs = cov.sigma_n[s, i]
    try:
        f = linalg.cholesky(sub)
    except NotPositiveDefinite as e:
        raise SingularSupport(
            f"support {s} of node {i} is numerically singular at pivot {e.pivot_index}",
            pivot_index=e.pivot_index,
        ) from e
    return linalg.solve_spd(f, rhs)


def residual_variance(
    cov: EmpiricalCovariance, i: int, support: Sequence[int], theta: np.ndarray
) -> float:
    """Variance of the residual X_i - theta . X_S (marginal variance if S empty)."""
    s = [int(j) for j in support]
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (len(s),):
        raise DimensionMismatch(
            f"theta has shape {theta.shape}, expected ({len(s)},)"
        )
    v = float(cov.sigma_n[i, i])
    if s:
        rhs = cov.sigma_n[s, i]
        sub = cov.sigma_n[np.ix_(s, s)]
        v = v - 2.0 * float(theta @ rhs) + float(theta @ sub @ theta)
    # Clamp fp-negative results from near-perfect fits.
    return max(v, 0.0)


def ols_orthogonality_gap(
    cov: EmpiricalCovariance, i: int, support: Sequence[int], theta: np.ndarray
) -> float:
    """Max |Sigma_n[S, i] - Sigma_n[S, S] theta|: normal-equation residual."""
    s = [int(j) for j in support]
    if not s:
        return 0.0
    rhs = cov.sigma_n[s, i]
    sub = cov.sigma_n[np.ix_(s, s)]
    return float(np.max(np.abs(rhs - sub @ np.asarray(theta, dtype=np.float64))))
