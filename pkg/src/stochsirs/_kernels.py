"""Select the compiled kernel if it was built, else the pure-Python one.

Set ``STOCHSIRS_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

try:
    if os.environ.get("STOCHSIRS_PURE_PYTHON", "").strip() not in ("", "0"):
        raise ImportError("pure-Python backend requested")
    from ._ckernels import integrate_path
    BACKEND = "cython"
except ImportError:
    integrate_path = _pykernels.integrate_path
    BACKEND = "python"

__all__ = ["integrate_path", "BACKEND"]
