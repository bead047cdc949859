"""Special functions, symmetric-matrix helpers and a box-constrained maximizer."""
from __future__ import annotations

from ._backend import BACKEND
from .linalg import SymMat, duplication, sym_eig, unvech, vech
from .optimize import OptimizerSpec, OptResult, maximize, projected_gradient
from .special import bessel_i_ratio, log_bessel_i, log_gamma, scaled_bessel_term

__all__ = [
    "BACKEND",
    "SymMat",
    "OptimizerSpec",
    "OptResult",
    "bessel_i_ratio",
    "duplication",
    "log_bessel_i",
    "log_gamma",
    "maximize",
    "projected_gradient",
    "scaled_bessel_term",
    "sym_eig",
    "unvech",
    "vech",
]
