"""Optional numba acceleration.

Set ``NSPOLAR_DISABLE_NUMBA=1`` to force the pure-numpy kernels even when
numba is importable.
"""

import os

_disabled = os.environ.get("NSPOLAR_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap


def use_numba(flag=None):
    """Resolve a per-call override against the module-wide default."""
    if flag is None:
        return HAVE_NUMBA
    return bool(flag) and HAVE_NUMBA
