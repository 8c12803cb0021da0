"""Accelerated numeric kernels (numba ``@njit`` scalar loops).

Default backend when numba imports.  Behaviourally identical to
:mod:`gbnlearn.backends.numpy_backend`: same pivot rules, same
tolerances, divisions done via multiplication by the reciprocal.  See
that module's docstring for the status-code conventions.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

NAME = "numba"

_STRUCT_ZERO = 1e-11


@njit(cache=True)
def chol_factor(a, ptol):
    n = a.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        s = a[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if s <= ptol:
            return L, j
        d = math.sqrt(s)
        L[j, j] = d
        inv = 1.0 / d
        for i in range(j + 1, n):
            t = a[i, j]
            for k in range(j):
                t -= L[i, k] * L[j, k]
            L[i, j] = t * inv
    return L, -1


@njit(cache=True)
def chol_solve(L, b):
    n = L.shape[0]
    y = b.copy()
    for i in range(n):
        s = y[i]
        for k in range(i):
            s -= L[i, k] * y[k]
        y[i] = s * (1.0 / L[i, i])
    for i in range(n - 1, -1, -1):
        s = y[i]
        for k in range(i + 1, n):
            s -= L[k, i] * y[k]
        y[i] = s * (1.0 / L[i, i])
    return y


@njit(cache=True)
def chol_inverse(L):
    n = L.shape[0]
    Y = np.zeros((n, n))
    for i in range(n):
        inv = 1.0 / L[i, i]
        for col in range(n):
            s = 1.0 if i == col else 0.0
            for k in range(i):
                s -= L[i, k] * Y[k, col]
            Y[i, col] = s * inv
    X = np.zeros((n, n))
    for i in range(n - 1, -1, -1):
        inv = 1.0 / L[i, i]
        for col in range(n):
            s = Y[i, col]
            for k in range(i + 1, n):
                s -= L[k, i] * X[k, col]
            X[i, col] = s * inv
    return X


@njit(cache=True)
def min_eig(a, tol, max_sweeps):
    """Cyclic Jacobi rotations; returns (min diagonal at convergence, info)."""
    n = a.shape[0]
    A = a.copy()
    if n == 1:
        return A[0, 0], 0
    for _sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += A[i, j] * A[i, j]
        off = math.sqrt(2.0 * off)
        if off <= tol:
            lam = A[0, 0]
            for i in range(1, n):
                if A[i, i] < lam:
                    lam = A[i, i]
            return lam, 0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                cth = 1.0 / math.sqrt(t * t + 1.0)
                sth = t * cth
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = cth * akp - sth * akq
                    A[k, q] = sth * akp + cth * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = cth * apk - sth * aqk
                    A[q, k] = sth * apk + cth * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
    lam = A[0, 0]
    for i in range(1, n):
        if A[i, i] < lam:
            lam = A[i, i]
    return lam, 1


@njit(cache=True)
def _pivot(T, basis, r, j):
    nrow = T.shape[0]
    ncol = T.shape[1]
    inv = 1.0 / T[r, j]
    for jj in range(ncol):
        T[r, jj] *= inv
    for rr in range(nrow):
        if rr == r:
            continue
        f = T[rr, j]
        if f != 0.0:
            for jj in range(ncol):
                T[rr, jj] -= f * T[r, jj]
    for rr in range(nrow):
        T[rr, j] = 0.0
    T[r, j] = 1.0
    basis[r] = j


@njit(cache=True)
def _iterate(T, basis, active, n_scan, tol, max_iter, iters):
    m = T.shape[0] - 1
    width = T.shape[1] - 1
    while True:
        enter = -1
        for j in range(n_scan):
            if T[m, j] < -tol:
                enter = j  # Bland: lowest eligible variable index
                break
        if enter == -1:
            return 0, iters
        if iters >= max_iter:
            return 3, iters
        best = np.inf
        leave = -1
        for r in range(m):
            if active[r] and T[r, enter] > tol:
                ratio = T[r, width] / T[r, enter]
                if ratio < best:
                    best = ratio
                    leave = r
                elif ratio == best and leave >= 0 and basis[r] < basis[leave]:
                    leave = r  # Bland tie rule: lowest basic variable index
        if leave == -1:
            return 2, iters
        _pivot(T, basis, leave, enter)
        iters += 1


@njit(cache=True)
def simplex(a, b, c, tol, max_iter):
    m, n = a.shape
    A = a.copy()
    bb = b.copy()
    for r in range(m):
        if bb[r] < 0.0:
            bb[r] = -bb[r]
            for j in range(n):
                A[r, j] = -A[r, j]

    basis = np.full(m, -1, dtype=np.int64)
    for j in range(n):
        cnt = 0
        row = -1
        for r in range(m):
            if abs(A[r, j]) > _STRUCT_ZERO:
                cnt += 1
                row = r
        if cnt != 1 or basis[row] != -1:
            continue
        v = A[row, j]
        if v < 0.0:
            if bb[row] != 0.0:
                continue
            for jj in range(n):
                A[row, jj] = -A[row, jj]
            v = -v
        inv = 1.0 / v
        for jj in range(n):
            A[row, jj] *= inv
        bb[row] *= inv
        basis[row] = j

    n_art = 0
    for r in range(m):
        if basis[r] == -1:
            n_art += 1
    width = n + n_art
    T = np.zeros((m + 1, width + 1))
    for r in range(m):
        for j in range(n):
            T[r, j] = A[r, j]
        T[r, width] = bb[r]
    k = 0
    for r in range(m):
        if basis[r] == -1:
            T[r, n + k] = 1.0
            basis[r] = n + k
            k += 1
    active = np.ones(m, dtype=np.bool_)
    x = np.zeros(n)

    for j in range(n, width):
        T[m, j] = 1.0
    for r in range(m):
        if basis[r] >= n:
            for j in range(width + 1):
                T[m, j] -= T[r, j]
    status, iters = _iterate(T, basis, active, width, tol, max_iter, 0)
    if status == 3:
        return 3, x, np.nan, iters
    if status == 2:
        return 1, x, np.nan, iters
    bmax = 1.0
    for r in range(m):
        if bb[r] > bmax:
            bmax = bb[r]
    if -T[m, width] > 10.0 * tol * bmax:
        return 1, x, np.nan, iters

    for r in range(m):
        if basis[r] >= n:
            pj = -1
            for j in range(n):
                if abs(T[r, j]) > _STRUCT_ZERO:
                    pj = j
                    break
            if pj >= 0:
                _pivot(T, basis, r, pj)
                iters += 1
            else:
                active[r] = False
                for j in range(width + 1):
                    T[r, j] = 0.0

    for j in range(width + 1):
        T[m, j] = 0.0
    for j in range(n):
        T[m, j] = c[j]
    for r in range(m):
        if active[r] and basis[r] < n:
            cb = c[basis[r]]
            if cb != 0.0:
                for j in range(width + 1):
                    T[m, j] -= cb * T[r, j]
    status, iters = _iterate(T, basis, active, n, tol, max_iter, iters)
    if status != 0:
        return status, x, np.nan, iters
    for r in range(m):
        if active[r] and basis[r] < n:
            v = T[r, width]
            x[basis[r]] = v if v > 0.0 else 0.0
    obj = 0.0
    for j in range(n):
        obj += c[j] * x[j]
    return 0, x, obj, iters
