"""Numba switch.

Set ``HELINS_NUMBA=0`` in the environment before import to run every hot
kernel through its pure-numpy twin instead.
"""
import os

_flag = os.environ.get("HELINS_NUMBA", "1").strip().lower()
_wanted = _flag not in ("0", "false", "no", "off")

try:
    import numba as _nb
except ImportError:  # pragma: no cover - numba is a declared dependency
    _nb = None

USE_NUMBA = _wanted and _nb is not None


def njit(*args, **kwargs):
    """``numba.njit`` when enabled, otherwise a pass-through decorator."""
    if USE_NUMBA:
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        return _nb.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn
