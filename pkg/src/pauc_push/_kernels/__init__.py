"""Kernel selection: compiled extension when built, NumPy fallback otherwise.

Set PAUC_PUSH_PURE_PYTHON=1 to force the fallback (used by the kernel
benchmark and for debugging).
"""
import os

from . import _cd_py

_FORCE_PY = os.environ.get("PAUC_PUSH_PURE_PYTHON", "").strip().lower() in {
    "1",
    "true",
    "yes",
    "on",
}

if _FORCE_PY:
    _impl = _cd_py
    BACKEND = "python"
else:
    try:
        from . import _cd_fast as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _cd_py
        BACKEND = "python"

cd_sweep = _impl.cd_sweep
cd_solve = _impl.cd_solve


def backend() -> str:
    """Name of the active kernel implementation: "cython" or "python"."""
    return BACKEND
