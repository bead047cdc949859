"""Select the compiled kernels when available, else the pure-Python ones.

Set ``MILE_PURE_PYTHON=1`` in the environment to force the fallback.
"""
from __future__ import annotations

import os

if os.environ.get("MILE_PURE_PYTHON", "") == "1":
    from . import _pykernels as kernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:
        from . import _pykernels as kernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
