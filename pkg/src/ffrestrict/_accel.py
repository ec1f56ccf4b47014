"""Numba switch for the hot kernels.

Set ``FFRESTRICT_DISABLE_NUMBA=1`` (or numba's own ``NUMBA_DISABLE_JIT=1``)
to run the pure-numpy kernels instead. The choice is made once, at import.
"""
import os

_FLAG = "FFRESTRICT_DISABLE_NUMBA"


def _numba_requested():
    if os.environ.get(_FLAG, "0") not in ("", "0"):
        return False
    return os.environ.get("NUMBA_DISABLE_JIT", "0") in ("", "0")


try:
    from numba import njit as _njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and _numba_requested()


def njit(func):
    """Compile ``func`` with numba when available, else return it untouched."""
    if not HAS_NUMBA:
        return func
    return _njit(cache=True, nogil=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
