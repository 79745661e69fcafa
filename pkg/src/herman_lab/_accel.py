"""Backend selection for the hot loops.

Set ``HERMAN_LAB_NO_NUMBA=1`` to force the pure-numpy path.  The numba
path is used by default whenever numba imports cleanly.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_FLAG = os.environ.get("HERMAN_LAB_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _FLAG not in ("", "0", "false", "no")

BACKEND = "numba" if HAVE_NUMBA and not NUMBA_DISABLED else "numpy"

# nogil lets the tile renderer overlap kernels across threads
NUMBA_OPTS = {"cache": True, "nogil": True, "fastmath": False}


def njit(fn):
    """Compile ``fn`` with numba when available; otherwise return it unchanged."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(**NUMBA_OPTS)(fn)


def resolve(backend=None):
    """Return the backend to use for one call (explicit argument wins)."""
    if backend is None:
        return BACKEND
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend


def worker_count(default=None):
    """Worker count from ``HERMAN_LAB_WORKERS`` (falls back to ``default`` or 1)."""
    raw = os.environ.get("HERMAN_LAB_WORKERS")
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ValueError(f"HERMAN_LAB_WORKERS must be an integer, got {raw!r}") from exc
        return max(1, n)
    return default if default is not None else 1
