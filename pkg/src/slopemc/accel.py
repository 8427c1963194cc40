"""Backend selection for the stability hot kernels.

The circle-equilibrium kernels exist in two interchangeable
implementations: numba-jitted loops (fast) and vectorized numpy
(portable fallback). The active backend is fixed once at import time
via the ``SLOPEMC_NUMBA`` environment variable:

* ``"0"``, ``"off"``, ``"false"`` -- force the pure-numpy path,
* ``"1"``, ``"on"``, ``"true"``  -- require numba (raise if missing),
* unset / anything else          -- use numba when importable.

``bench/bench_kernels.py`` times both implementations side by side.
"""

import os

_OFF = ("0", "off", "false", "no")
_ON = ("1", "on", "true", "yes")


def _resolve_backend() -> str:
    raw = os.environ.get("SLOPEMC_NUMBA", "auto").strip().lower()
    if raw in _OFF:
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if raw in _ON:
            raise ImportError(
                "SLOPEMC_NUMBA=%s requires numba, which is not installed" % raw
            )
        return "numpy"
    return "numba"


BACKEND = _resolve_backend()


def kernels():
    """Return the active kernel module (numba-jitted or numpy)."""
    if BACKEND == "numba":
        from . import _kernels_numba

        return _kernels_numba
    from . import _kernels_numpy

    return _kernels_numpy
