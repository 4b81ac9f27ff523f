"""Numba/pure-Python backend selection.

Hot kernels in :mod:`spadcal._kernels` are written as plain Python functions
operating on numpy arrays and scalars, and are JIT-compiled with numba when it
is available.  Setting the environment variable ``SPADCAL_DISABLE_NUMBA`` to a
non-empty value (before first import) forces the interpreted fallback, which
produces bit-identical results but is far slower on large streams.
"""

import os

DISABLE_ENV = "SPADCAL_DISABLE_NUMBA"

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and not os.environ.get(DISABLE_ENV)


def jit_compile(func):
    """Apply ``numba.njit`` when the numba backend is active, else no-op."""
    if USE_NUMBA:
        return numba.njit(cache=True)(func)
    return func
