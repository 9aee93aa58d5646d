"""Numba switch for the hot kernels.

Every accelerated kernel in the package exists twice: a loop version that is
compiled with :func:`njit`, and a vectorised numpy version. Which one the public
name points at is decided once, at import time:

* ``IMPGREEN_BACKEND=numpy`` forces the numpy fallback,
* ``IMPGREEN_BACKEND=numba`` (default) uses numba when it can be imported.
"""
from __future__ import annotations

import os

_requested = os.environ.get("IMPGREEN_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"IMPGREEN_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _requested == "numba"
BACKEND = "numba" if USE_NUMBA else "numpy"

_JIT_KWARGS = {"nopython": True, "cache": True, "nogil": True}


def njit(func):
    """Compile ``func`` with numba if available, otherwise return it unchanged.

    The loop implementations stay importable (and testable, slowly) without numba.
    """
    if HAVE_NUMBA:
        return numba.jit(**_JIT_KWARGS)(func)
    return func


def pick(numba_impl, numpy_impl):
    return numba_impl if USE_NUMBA else numpy_impl
