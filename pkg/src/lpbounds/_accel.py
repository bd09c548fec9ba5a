"""Backend selection for the compiled kernels.

Set ``LPBOUNDS_DISABLE_NUMBA=1`` to force the pure-numpy code paths. Numba is
also skipped silently when it cannot be imported.
"""
import os

_FLAG = os.environ.get("LPBOUNDS_DISABLE_NUMBA", "").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise.

    The decorated function is compiled lazily, so importing this package with
    the flag set never triggers compilation.
    """
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
