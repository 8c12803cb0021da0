"""Column-wise L1-penalized precision estimation (constrained L1 minimization).

Each column solves

    min ||w||_1  subject to  ||Sigma_n w - e_i||_inf <= lambda

as a standard-form LP over the split w = w+ - w- with one slack block
per inequality side.  Columns are independent (and could be solved in
parallel); they are solved in index order so results never depend on
scheduling.  The column estimates are then symmetrized by keeping the
smaller-magnitude entry of each (i, j)/(j, i) pair, ties resolved to the
(j, i) entry for i < j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gbnlearn.errors import DimensionMismatch, LpError, NotSymmetric
from gbnlearn.lp import DEFAULT_TOL, LpStandardForm, solve_lp

_SYM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PrecisionEstimate:
    """Symmetrized precision estimate with its feasibility certificate.

    ``feasibility_gap`` is the max over pre-symmetrization columns of
    ||Sigma_n w - e_i||_inf; it never exceeds lambda by more than solver
    tolerance.
    """

    omega_hat: np.ndarray
    lam: float
    feasibility_gap: float


def _check_sigma(sigma_n) -> np.ndarray:
    s = np.asarray(sigma_n, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DimensionMismatch(f"sigma_n must be square, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValueError("sigma_n contains non-finite entries")
    gap = float(np.max(np.abs(s - s.T))) if s.size else 0.0
    if gap > _SYM_TOL:
        raise NotSymmetric(f"sigma_n is not symmetric: max |A - A.T| = {gap:.3e}")
    return s


def column_lp(sigma_n: np.ndarray, i: int, lam: float) -> LpStandardForm:
    """Standard-form encoding of the column-i problem.

    Variables [w+, w-, s_hi, s_lo] (4p of them), constraints
    S w+ - S w- + s_hi = e_i + lambda, S w+ - S w- - s_lo = e_i - lambda.
    """
    p = sigma_n.shape[0]
    e = np.zeros(p)
    e[i] = 1.0
    a = np.block(
        [
            [sigma_n, -sigma_n, np.eye(p), np.zeros((p, p))],
            [sigma_n, -sigma_n, np.zeros((p, p)), -np.eye(p)],
        ]
    )
    b = np.concatenate([e + lam, e - lam])
    c = np.concatenate([np.ones(2 * p), np.zeros(2 * p)])
    return LpStandardForm(c=c, a=a, b=b)


def clime_column(sigma_n, i: int, lam: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Minimum-L1 column estimate; raises LpError subclasses on failure.

    Infeasibility is possible only when sigma_n is rank-deficient and
    lambda is too small to absorb the deficiency.
    """
    s = _check_sigma(sigma_n)
    p = s.shape[0]
    if not (0 <= i < p):
        raise ValueError(f"column {i} out of range for p = {p}")
    if lam < 0.0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    x, _ = solve_lp(column_lp(s, i, lam), tol=tol)
    return x[:p] - x[p : 2 * p]


def clime(sigma_n, lam: float, tol: float = DEFAULT_TOL) -> PrecisionEstimate:
    """Estimate the full precision matrix column by column and symmetrize."""
    s = _check_sigma(sigma_n)
    p = s.shape[0]
    if lam < 0.0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    cols = np.zeros((p, p))
    for i in range(p):
        try:
            cols[:, i] = clime_column(s, i, lam, tol=tol)
        except LpError as e:
            raise type(e)(f"column {i}: {e}") from e
    gap = float(np.max(np.abs(s @ cols - np.eye(p)))) if p else 0.0
    omega = np.zeros((p, p))
    for i in range(p):
        omega[i, i] = cols[i, i]
        for j in range(i + 1, p):
            # Keep the smaller-magnitude entry; exact ties take cols[j, i].
            v = cols[i, j] if abs(cols[i, j]) < abs(cols[j, i]) else cols[j, i]
            omega[i, j] = v
            omega[j, i] = v
    return PrecisionEstimate(omega_hat=omega, lam=float(lam), feasibility_gap=gap)


def default_lambda(n: int, p: int, k_hint: int) -> float:
    """Penalty rule 0.5 * k_hint * sqrt(ln(p) / n) (natural log)."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    if k_hint < 1:
        raise ValueError(f"k_hint must be >= 1, got {k_hint}")
    return 0.5 * k_hint * math.sqrt(math.log(p) / n)


def lambda_floor(sigma: np.ndarray, omega: np.ndarray, n: int, delta: float = 0.05) -> float:
    """Theoretical lower bound on lambda for the estimation guarantee.

    ||Omega||_L1 * sqrt(C1 log(4 p^2 / delta) / n) with
    C1 = 3200 * max_i Sigma[i, i]^2.  Diagnostic only; far too
    conservative to run with.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    omega = np.asarray(omega, dtype=np.float64)
    p = sigma.shape[0]
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must be in (0, 1)")
    c1 = 3200.0 * float(np.max(np.diag(sigma))) ** 2
    norm_l1 = float(np.max(np.abs(omega).sum(axis=0)))
    return norm_l1 * math.sqrt(c1 * math.log(4.0 * p * p / delta) / n)
