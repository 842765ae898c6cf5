"""JIT selection for the hot simulation kernels.

Kernels are written once in numba-compatible Python. Setting the
environment variable ``EVLAB_DISABLE_JIT=1`` before import runs them as
plain Python instead, which is slow but dependency-light and handy for
debugging. Compiled dispatchers keep the interpreted version reachable
through ``.py_func``.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}

JIT_DISABLED = os.environ.get("EVLAB_DISABLE_JIT", "").strip().lower() not in _FALSY

try:
    from numba import njit as _njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _njit = None
    HAVE_NUMBA = False

USING_JIT = HAVE_NUMBA and not JIT_DISABLED


def jit(fn):
    """Compile ``fn`` with numba (nopython, nogil) unless disabled."""
    if USING_JIT:
        return _njit(nogil=True, cache=True)(fn)
    fn.py_func = fn
    return fn


def backend_name():
    return "numba" if USING_JIT else "python"
