"""Special functions with argument checking.

All heavy lifting happens in the backend kernels; this layer validates
inputs and converts to plain floats.
"""
from __future__ import annotations

import math

from ..errors import DomainError
from ._backend import kernels


def log_gamma(x: float) -> float:
    """Natural logarithm of the gamma function for ``x > 0``.

    Parameters
    ----------
    x : float
        Positive argument.

    Returns
    -------
    float
        ``ln Gamma(x)``.
    """
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def _check_nu_x(nu: float, x: float) -> tuple[float, float]:
    nu = float(nu)
    x = float(x)
    if not nu >= -0.5:
        raise DomainError(f"order nu must be >= -1/2, got {nu!r}")
    if not x >= 0.0:
        raise DomainError(f"argument x must be >= 0, got {x!r}")
    if math.isinf(nu) or math.isinf(x):
        raise DomainError("order and argument must be finite")
    return nu, x


def log_bessel_i(nu: float, x: float) -> float:
    """Logarithm of the modified Bessel function of the first kind.

    Stable for orders and arguments up to at least ``1e7``; the value is
    computed without ever forming ``I_nu(x)`` itself.

    Parameters
    ----------
    nu : float
        Order, ``nu >= -1/2``.
    x : float
        Argument, ``x >= 0`` (strictly positive when ``nu = -1/2``).

    Returns
    -------
    float
        ``ln I_nu(x)``; ``-inf`` at ``x = 0`` for ``nu > 0``.
    """
    nu, x = _check_nu_x(nu, x)
    if x == 0.0 and nu == -0.5:
        raise DomainError("I_{-1/2} is unbounded at x = 0")
    return kernels.log_bessel_i(nu, x)


def bessel_i_ratio(nu: float, x: float) -> float:
    """Ratio ``I_{nu+1}(x) / I_nu(x)`` for ``nu >= 0`` and ``x > 0``."""
    nu, x = _check_nu_x(nu, x)
    if nu < 0.0:
        raise DomainError(f"bessel_i_ratio requires nu >= 0, got {nu!r}")
    if x <= 0.0:
        raise DomainError(f"bessel_i_ratio requires x > 0, got {x!r}")
    return kernels.bessel_i_ratio(nu, x)


def scaled_bessel_term(nu: float, z: float, s: float) -> float:
    """Scaled log Bessel term ``(1/s) ln(z^{-nu} I_nu(s z / 2))``.

    At ``z = 0`` the analytic limit ``(1/s)[nu ln(s/4) - ln Gamma(nu+1)]``
    is returned, and small ``z`` is handled without cancelling the
    ``z^{-nu}`` factor numerically.

    Parameters
    ----------
    nu : float
        Order, ``nu >= -1/2``.
    z : float
        Non-negative argument.
    s : float
        Positive scale (the sample size in the likelihoods).
    """
    nu, z = _check_nu_x(nu, z)
    s = float(s)
    if not s > 0.0 or math.isinf(s):
        raise DomainError(f"scale s must be positive and finite, got {s!r}")
    return kernels.scaled_bessel_term(nu, z, s)
