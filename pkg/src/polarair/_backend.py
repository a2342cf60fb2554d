"""Kernel backend selection.

Hot loops are compiled with numba when it is importable and not disabled.
Set ``POLARAIR_NUMBA=0`` to force the pure-numpy fallback kernels.
"""

import os

_DISABLED = os.environ.get("POLARAIR_NUMBA", "1").strip().lower() in ("0", "false", "no", "off")

try:
    if _DISABLED:
        raise ImportError("numba disabled by POLARAIR_NUMBA")
    import numba

    HAS_NUMBA = True
    njit = numba.njit
except ImportError:
    numba = None
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        # bare @njit or @njit(...) both become identity decorators
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


def backend_name():
    return "numba" if HAS_NUMBA else "numpy"
