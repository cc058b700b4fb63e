"""Kernel backend selection.

``HIERCLUST_BACKEND=numpy`` forces the pure-numpy kernels; ``numba`` (the
default when numba imports) uses the jitted ones.  The choice is read once at
import time.
"""

import os

_requested = os.environ.get("HIERCLUST_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"HIERCLUST_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None

HAVE_NUMBA = _numba is not None
BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise a no-op decorator."""
    if _numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    return _numba.njit(*args, **kwargs)


def worker_count():
    """Worker cap from ``HIERCLUST_THREADS`` (default: all cores)."""
    raw = os.environ.get("HIERCLUST_THREADS")
    if raw:
        n = int(raw)
        if n < 1:
            raise ValueError("HIERCLUST_THREADS must be positive")
        return n
    return os.cpu_count() or 1
