"""Backend selection for the numeric kernels.

Two interchangeable implementations exist: an accelerated one built on
numba ``@njit`` scalar loops and a pure-numpy fallback.  The active one
is chosen once, on first use, from the ``GBNLEARN_BACKEND`` environment
variable:

* ``numba``  - require the accelerated backend (ImportError if missing)
* ``numpy``  - force the fallback
* unset / ``auto`` - accelerated if numba imports, fallback otherwise

`load_backend` gives direct access to a specific implementation, which
the cross-backend tests and the benchmark use to compare both.
"""

from __future__ import annotations

import os

_ENV_VAR = "GBNLEARN_BACKEND"
_active = None


def load_backend(name: str):
    """Import and return the backend module named "numba" or "numpy"."""
    key = name.strip().lower()
    if key == "numpy":
        from gbnlearn.backends import numpy_backend

        return numpy_backend
    if key == "numba":
        from gbnlearn.backends import numba_backend

        return numba_backend
    raise ValueError(f"unknown backend {name!r}: expected 'numba' or 'numpy'")


def active_backend():
    """Return the module selected by the environment (sticky after first call)."""
    global _active
    if _active is None:
        requested = os.environ.get(_ENV_VAR, "auto").strip().lower() or "auto"
        if requested == "auto":
            try:
                _active = load_backend("numba")
            except ImportError:
                _active = load_backend("numpy")
        else:
            _active = load_backend(requested)
    return _active


def active_backend_name() -> str:
    return active_backend().NAME
