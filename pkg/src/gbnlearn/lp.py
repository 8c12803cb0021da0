"""Standard-form linear programs and the dense simplex driver.

The solver is a two-phase primal simplex with Bland's anti-cycling rule
(lowest eligible index enters; on ratio ties the row whose basic
variable has the lowest index leaves), so it terminates on degenerate
instances without perturbation.  The pivoting itself lives in the
backend kernels; this module validates, dispatches, and converts status
codes into exceptions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gbnlearn.backends import active_backend
from gbnlearn.errors import DimensionMismatch, Infeasible, IterationLimit, Unbounded

DEFAULT_TOL = 1e-9

# Iteration budget multiplier: 50 * (variables + constraints).
_ITER_FACTOR = 50


@dataclass(frozen=True, eq=False)
class LpStandardForm:
    """min c.x subject to a x = b, x >= 0."""

    c: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.a, dtype=np.float64)
        c = np.ascontiguousarray(self.c, dtype=np.float64)
        b = np.ascontiguousarray(self.b, dtype=np.float64)
        if a.ndim != 2:
            raise DimensionMismatch(f"constraint matrix must be 2-D, got {a.shape}")
        m, n = a.shape
        if c.shape != (n,):
            raise DimensionMismatch(f"c has shape {c.shape}, expected ({n},)")
        if b.shape != (m,):
            raise DimensionMismatch(f"b has shape {b.shape}, expected ({m},)")
        for name, arr in (("c", c), ("a", a), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def n_vars(self) -> int:
        return self.a.shape[1]

    @property
    def n_constraints(self) -> int:
        return self.a.shape[0]


def solve_lp(lp: LpStandardForm, tol: float = DEFAULT_TOL, max_iter: int | None = None):
    """Solve to a vertex optimum; returns (x, objective).

    Raises Infeasible, Unbounded, or IterationLimit.  The default
    iteration cap is 50 * (variables + constraints).
    """
    if max_iter is None:
        max_iter = _ITER_FACTOR * (lp.n_vars + lp.n_constraints)
    status, x, obj, iters = active_backend().simplex(lp.a, lp.b, lp.c, tol, max_iter)
    if status == 0:
        return x, float(obj)
    if status == 1:
        raise Infeasible("no feasible point (phase-1 optimum positive)")
    if status == 2:
        raise Unbounded("objective unbounded below")
    raise IterationLimit(f"simplex exceeded {max_iter} pivots ({iters} done)")
