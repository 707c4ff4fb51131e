"""Kernel backend selection.

Hot loops are written once in a numba-compatible subset of Python. When numba
is importable they are compiled with ``@njit``; otherwise, or when the
environment variable ``TREASURY_KELLY_DISABLE_NUMBA`` is set to a truthy value,
the vectorised numpy implementations in :mod:`treasury_kelly._kernels` are used.
"""

from __future__ import annotations

import os

_FLAG = "TREASURY_KELLY_DISABLE_NUMBA"


def _disabled_by_env() -> bool:
    return os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


try:  # pragma: no cover - depends on the environment
    if _disabled_by_env():
        raise ImportError
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _njit = None
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def njit(fn):
    """Compile ``fn`` with numba when available, else return it unchanged."""
    if _njit is None:
        return fn
    return _njit(cache=True, fastmath=False)(fn)
