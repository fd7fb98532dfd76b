"""Numba/numpy backend selection for the hot numerical kernels.

The accelerated kernels are compiled with numba when it is importable.  Set
``EITCOOL_BACKEND=numpy`` to force the pure-numpy fallback (useful for
debugging and for benchmarking the two paths against each other), or
``EITCOOL_BACKEND=numba`` to fail loudly if numba cannot be imported.
"""
import os

_requested = os.environ.get("EITCOOL_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"EITCOOL_BACKEND={_requested!r} not understood (use 'numba' or 'numpy')")

if _requested == "numpy":
    HAVE_NUMBA = False
else:
    try:
        import numba  # noqa: F401
        HAVE_NUMBA = True
    except ImportError:
        if _requested == "numba":
            raise
        HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA

BACKEND = "numba" if USE_NUMBA else "numpy"


def jit_kernel(func):
    """Compile ``func`` with numba when the numba backend is active."""
    if USE_NUMBA:
        from numba import njit
        return njit(cache=True)(func)
    return func
