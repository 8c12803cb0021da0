"""Pure-numpy implementations of the numeric kernels.

Selected when the accelerated backend is unavailable or when
``GBNLEARN_BACKEND=numpy`` is set.  Every function here has a loop-level
twin in :mod:`gbnlearn.backends.numba_backend`; the two follow the same
pivot rules and tolerances (and both divide via multiplication by the
reciprocal) so the backend choice never changes a result beyond
floating-point noise.

Status-code conventions (kernels never raise):

* ``chol_factor`` -> (L, info): info = -1 ok, else failing pivot index.
* ``min_eig``     -> (value, info): info = 0 ok, 1 no convergence.
* ``simplex``     -> (status, x, objective, iterations): status 0 optimal,
  1 infeasible, 2 unbounded, 3 iteration limit.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"

# Entries smaller than this are treated as structural zeros when scanning
# for crash-basis columns and drive-out pivots.
_STRUCT_ZERO = 1e-11


def chol_factor(a, ptol):
    n = a.shape[0]
    L = np.zeros_like(a)
    for j in range(n):
        s = a[j, j] - L[j, :j] @ L[j, :j]
        if s <= ptol:
            return L, j
        d = np.sqrt(s)
        L[j, j] = d
        if j + 1 < n:
            L[j + 1:, j] = (a[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) * (1.0 / d)
    return L, -1


def chol_solve(L, b):
    n = L.shape[0]
    y = b.astype(np.float64).copy()
    for i in range(n):
        y[i] = (y[i] - L[i, :i] @ y[:i]) * (1.0 / L[i, i])
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - L[i + 1:, i] @ y[i + 1:]) * (1.0 / L[i, i])
    return y


def chol_inverse(L):
    n = L.shape[0]
    eye = np.eye(n)
    Y = np.zeros((n, n))
    for i in range(n):
        Y[i] = (eye[i] - L[i, :i] @ Y[:i]) * (1.0 / L[i, i])
    X = np.zeros((n, n))
    for i in range(n - 1, -1, -1):
        X[i] = (Y[i] - L[i + 1:, i] @ X[i + 1:]) * (1.0 / L[i, i])
    return X


def min_eig(a, tol, max_sweeps):
    # LAPACK already meets any tolerance we would ask of the Jacobi twin.
    del tol, max_sweeps
    return float(np.linalg.eigvalsh(a)[0]), 0


def _pivot(T, basis, r, j):
    T[r] *= 1.0 / T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[:, j] = 0.0
    T[r, j] = 1.0
    basis[r] = j


def _iterate(T, basis, active, n, tol, max_iter, iters):
    """Bland-rule pivoting restricted to the first n (non-artificial) columns."""
    m = T.shape[0] - 1
    width = T.shape[1] - 1
    while True:
        elig = np.flatnonzero(T[m, :n] < -tol)
        if elig.size == 0:
            return 0, iters
        if iters >= max_iter:
            return 3, iters
        j = int(elig[0])  # Bland: lowest eligible variable index
        col = T[:m, j]
        rows = np.flatnonzero(active & (col > tol))
        if rows.size == 0:
            return 2, iters
        ratios = T[rows, width] / col[rows]
        best = ratios.min()
        cand = rows[ratios == best]
        # Bland tie rule: leave the basic variable with the lowest index.
        r = int(cand[np.argmin(basis[cand])]) if cand.size > 1 else int(cand[0])
        _pivot(T, basis, r, j)
        iters += 1


def simplex(a, b, c, tol, max_iter):
    """Two-phase primal simplex for min c.x s.t. a x = b, x >= 0."""
    m, n = a.shape
    A = np.array(a, dtype=np.float64)
    bb = np.array(b, dtype=np.float64)
    cc = np.asarray(c, dtype=np.float64)

    neg = bb < 0.0
    A[neg] *= -1.0
    bb[neg] *= -1.0

    # Crash basis: claim singleton columns, flipping zero-rhs rows whose
    # singleton entry is negative.  Cuts the artificial count sharply.
    basis = np.full(m, -1, dtype=np.int64)
    for j in range(n):
        nz = np.flatnonzero(np.abs(A[:, j]) > _STRUCT_ZERO)
        if nz.size != 1:
            continue
        r = int(nz[0])
        if basis[r] != -1:
            continue
        v = A[r, j]
        if v < 0.0:
            if bb[r] != 0.0:
                continue
            A[r] *= -1.0
            v = -v
        A[r] *= 1.0 / v
        bb[r] *= 1.0 / v
        basis[r] = j

    art_rows = np.flatnonzero(basis == -1)
    n_art = art_rows.size
    width = n + n_art
    T = np.zeros((m + 1, width + 1))
    T[:m, :n] = A
    T[:m, width] = bb
    for k, r in enumerate(art_rows):
        T[r, n + k] = 1.0
        basis[r] = n + k
    active = np.ones(m, dtype=bool)
    x = np.zeros(n)

    # Phase 1: minimize the artificial sum.  Reduced costs start as
    # 0 - sum(artificial-basic rows); crash columns already price to zero.
    T[m, n:width] = 1.0
    for r in art_rows:
        T[m] -= T[r]
    status, iters = _iterate(T, basis, active, width, tol, max_iter, 0)
    if status == 3:
        return 3, x, np.nan, iters
    if status == 2:
        # The phase-1 objective is bounded below by zero; reaching this
        # branch means numerics collapsed, report infeasible.
        return 1, x, np.nan, iters
    bmax = float(bb.max()) if m else 1.0
    if -T[m, width] > 10.0 * tol * max(1.0, bmax):
        return 1, x, np.nan, iters

    # Drive leftover artificials out of the basis (degenerate pivots);
    # rows with no real entry are redundant and are deactivated.
    for r in range(m):
        if basis[r] >= n:
            piv = np.flatnonzero(np.abs(T[r, :n]) > _STRUCT_ZERO)
            if piv.size:
                _pivot(T, basis, r, int(piv[0]))
                iters += 1
            else:
                active[r] = False
                T[r] = 0.0

    # Phase 2 over the real columns only.
    T[m] = 0.0
    T[m, :n] = cc
    for r in range(m):
        if active[r] and basis[r] < n and cc[basis[r]] != 0.0:
            T[m] -= cc[basis[r]] * T[r]
    status, iters = _iterate(T, basis, active, n, tol, max_iter, iters)
    if status != 0:
        return status, x, np.nan, iters
    for r in range(m):
        if active[r] and basis[r] < n:
            x[basis[r]] = max(T[r, width], 0.0)
    return 0, x, float(cc @ x), iters
