"""Numba switch.

Kernels are written once in the numba-compatible subset of numpy. When numba
is importable and ``EPSREP_NUMBA`` is not set to ``0``/``false``/``off`` the
kernels are compiled with ``njit``; otherwise the plain numpy versions run.
"""
import os

_FLAG = os.environ.get("EPSREP_NUMBA", "1").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is optional
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and _FLAG not in ("0", "false", "off", "no")


def njit(func):
    """Compile ``func`` with numba if available, else return it unchanged."""
    if not HAVE_NUMBA:
        return func
    return _numba.njit(cache=True)(func)


def pick(numba_impl, numpy_impl):
    return numba_impl if USE_NUMBA else numpy_impl
