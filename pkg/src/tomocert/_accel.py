"""Backend selection for the compiled kernels.

Set ``TOMOCERT_NUMBA=0`` in the environment to force the pure-numpy path.
The flag is read once at import time.
"""

import os

_FLAG = os.environ.get("TOMOCERT_NUMBA", "1").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("0", "false", "no", "off")
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(func):
    """Compile ``func`` with numba in nopython mode, or return it untouched."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)
