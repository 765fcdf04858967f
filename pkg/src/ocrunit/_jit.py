"""Optional numba acceleration.

Set ``OCRUNIT_DISABLE_NUMBA=1`` to force the pure-numpy kernels, e.g. when
debugging or on platforms without an LLVM toolchain.
"""
import os

_DISABLED = os.environ.get("OCRUNIT_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED


def njit(func):
    """Compile ``func`` with numba when available, else return a no-op wrapper-free function."""
    if _njit is None:
        return func
    return _njit(cache=True, nogil=True)(func)
