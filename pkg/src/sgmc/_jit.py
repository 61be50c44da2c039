"""Optional numba acceleration for the hot kernels.

Every kernel in the package is written in the numba-compatible subset of
Python/numpy and decorated with :func:`njit` from this module.  When numba is
importable and ``SGMC_DISABLE_NUMBA`` is unset (or ``0``), kernels are
compiled; otherwise the very same source runs as plain Python on numpy
scalars and arrays.  Both paths give bit-identical results.
"""

from __future__ import annotations

import functools
import os

import numpy as np

_FLAG = os.environ.get("SGMC_DISABLE_NUMBA", "0").strip().lower()
DISABLED_BY_ENV = _FLAG not in ("", "0", "false", "no")

try:  # pragma: no cover - exercised implicitly
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

USING_NUMBA = _numba is not None and not DISABLED_BY_ENV


def _fallback(func):
    # uint64 hashing relies on wrap-around; silence numpy's overflow warnings.
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        with np.errstate(over="ignore"):
            return func(*args, **kwargs)

    wrapper.py_func = func
    return wrapper


def njit(*args, **kwargs):
    """``numba.njit`` when acceleration is active, a thin wrapper otherwise.

    Usable bare (``@njit``) or with options (``@njit(nogil=True)``).
    """
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return njit()(args[0])

    def decorator(func):
        if USING_NUMBA:
            opts = {"cache": True}
            opts.update(kwargs)
            return _numba.njit(**opts)(func)
        return _fallback(func)

    return decorator


def backend() -> str:
    """Name of the active kernel backend: ``"numba"`` or ``"python"``."""
    return "numba" if USING_NUMBA else "python"
