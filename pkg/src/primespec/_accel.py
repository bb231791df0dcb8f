"""Optional numba acceleration.

Set ``PRIMESPEC_DISABLE_NUMBA=1`` to force the pure-numpy kernels even when
numba is importable.  ``USE_NUMBA`` is read once at import time.
"""
import os

_disabled = os.environ.get("PRIMESPEC_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _disabled:
        raise ImportError
    from numba import njit as _njit

    USE_NUMBA = True
except ImportError:
    USE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` when available, identity otherwise."""
    if USE_NUMBA:
        kwargs.setdefault("cache", True)
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
