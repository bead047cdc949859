"""Maximum invariant likelihood estimation for incidental-parameter models."""
from __future__ import annotations

from .numkern import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
