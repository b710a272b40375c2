"""Kernel backend selection.

MGARENA_BACKEND=numba (default when numba imports) jit-compiles every kernel
in _impl and rebinds the module globals so cross-kernel calls stay inside
compiled code.  MGARENA_BACKEND=numpy runs the same source as plain Python,
swapping in overflow-safe rng primitives from _rng_py.
"""

import os

from . import _impl
from ._impl import KERNELS

_requested = os.environ.get("MGARENA_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise RuntimeError("MGARENA_BACKEND must be 'numba' or 'numpy', got %r" % _requested)

BACKEND = _requested
if BACKEND == "":
    try:
        import numba  # noqa: F401
        BACKEND = "numba"
    except Exception:
        BACKEND = "numpy"

if BACKEND == "numba":
    from numba import njit

    for _name in KERNELS:
        _fn = getattr(_impl, _name)
        setattr(_impl, _name, njit(cache=True)(_fn))
else:
    from . import _rng_py

    _impl.mix64 = _rng_py.mix64
    _impl.ctr_value = _rng_py.ctr_value


def __getattr__(name):
    # late lookup so every caller sees the rebound (jitted) functions,
    # plus the shared constants (EPS_ID, GAMMA, PERM24, ...)
    return getattr(_impl, name)
