"""Numba/numpy backend selection for the hot kernels.

The environment variable ``FSVDD_NUMBA`` controls which implementation of
the inner loops is used:

* unset / ``auto`` — use numba when it imports cleanly, else numpy;
* ``1`` / ``true`` / ``on`` — require numba, raise if unavailable;
* ``0`` / ``false`` / ``off`` — force the pure-numpy fallback.

Only genuinely loop-bound kernels are dispatched this way (boundary-weight
solver, amplitude-activation forward/backward). Matrix products always go
through numpy's BLAS, which neither backend can beat.
"""

from __future__ import annotations

import os

_TRUTHY = {"1", "true", "on", "yes"}
_FALSY = {"0", "false", "off", "no"}


def _resolve() -> bool:
    flag = os.environ.get("FSVDD_NUMBA", "auto").strip().lower()
    if flag in _FALSY:
        return False
    try:
        import numba  # noqa: F401
        available = True
    except Exception:  # pragma: no cover - depends on install
        available = False
    if flag in _TRUTHY and not available:
        raise ImportError(
            "FSVDD_NUMBA requested the numba backend but numba is not importable"
        )
    return available


NUMBA_ENABLED: bool = _resolve()


def backend_name() -> str:
    """Name of the active kernel backend ("numba" or "numpy")."""
    return "numba" if NUMBA_ENABLED else "numpy"
