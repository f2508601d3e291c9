"""Backend selection for the hot kernels.

Numba is used when importable unless ``COMMBOUNDS_DISABLE_NUMBA`` is set to a
truthy value, in which case every kernel runs through its pure-numpy path.
The flag is read once, at import time.
"""

import os

_FLAG = "COMMBOUNDS_DISABLE_NUMBA"

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


def numba_disabled():
    return os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = HAVE_NUMBA and not numba_disabled()
