"""Backend selection for the compiled kernels.

Set ``HARBENCH_DISABLE_NUMBA=1`` before import to force the pure-numpy path.
"""

import os

_FLAG = os.environ.get("HARBENCH_DISABLE_NUMBA", "").strip().lower()

try:
    if _FLAG in ("1", "true", "yes"):
        raise ImportError("numba disabled by HARBENCH_DISABLE_NUMBA")
    from numba import njit as _njit

    NUMBA_ENABLED = True
except ImportError:
    _njit = None
    NUMBA_ENABLED = False


def njit(fn):
    """Compile ``fn`` with numba (cached) or return ``None`` when disabled."""
    if not NUMBA_ENABLED:
        return None
    return _njit(cache=True, nogil=True)(fn)


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
