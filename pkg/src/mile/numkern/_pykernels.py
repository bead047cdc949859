"""Pure-Python implementation of the hot scalar kernels.

This module mirrors ``_ckernels.pyx`` line for line and is used when the
compiled extension is unavailable (or when ``MILE_PURE_PYTHON=1``).  The
functions here perform no argument validation; see ``special.py``.

Regimes for ln I_nu(x):

* ascending series for x <= max(20, nu/2) (and for large nu with x < 1e-3 nu),
* uniform (Debye) expansion in nu for nu >= 200,
* Hankel large-argument expansion for x >= max(50, 2 nu^2),
* otherwise continued fractions (CF1 for the ratio, Steed's CF2 for
  scaled K) joined through the Wronskian.
"""
from __future__ import annotations

import math

from ._debye import U_COEFFS, W_COEFFS

EPS = 1e-16
TINY = 1e-300
MAXIT = 1_000_000
DEBYE_NU = 200.0
DEBYE_ZMIN = 1e-3
SERIES_X = 20.0
HANKEL_X = 50.0
RESCALE = 1e250
LOG_RESCALE = math.log(RESCALE)
HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _series_sum(nu: float, x: float) -> float:
    # sum_{k>=1} (x^2/4)^k / (k! (nu+1)_k)
    q = 0.25 * x * x
    term = 1.0
    total = 0.0
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + nu))
        total += term
        if term <= EPS * (1.0 + total) or k > MAXIT:
            break
    return total


def _poly(c, t: float) -> float:
    acc = 0.0
    for coef in reversed(c):
        acc = acc * t + coef
    return acc


def _debye_parts(nu: float, x: float):
    z = x / nu
    sq = math.sqrt(1.0 + z * z)
    t = 1.0 / sq
    eta = sq + math.log(z) - math.log1p(sq)
    u = 1.0
    w = 0.0
    p = 1.0
    for k in range(1, len(U_COEFFS)):
        p /= nu
        du = _poly(U_COEFFS[k], t) * p
        dw = _poly(W_COEFFS[k], t) * p
        u += du
        w += dw
        if abs(du) <= EPS * abs(u) and abs(dw) <= EPS * abs(w):
            break
    return z, sq, eta, u, w


def _log_debye(nu: float, x: float) -> float:
    z, sq, eta, u, _ = _debye_parts(nu, x)
    return nu * eta - 0.5 * math.log(nu) - HALF_LOG_2PI - 0.5 * math.log(sq) + math.log(u)


def _ratio_debye(nu: float, x: float) -> float:
    z, sq, _, u, w = _debye_parts(nu, x)
    return z / (1.0 + sq) + sq * w / (u * z)


def _hankel_sum(nu: float, x: float) -> float:
    mu = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    last = math.inf
    for k in range(1, 500):
        term *= -(mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        mag = abs(term)
        if mag >= last:
            break
        total += term
        if mag <= EPS * abs(total):
            break
        last = mag
    return total


def _log_hankel(nu: float, x: float) -> float:
    return x - 0.5 * math.log(x) - HALF_LOG_2PI + math.log(_hankel_sum(nu, x))


def _ratio_cf1(nu: float, x: float) -> float:
    # modified Lentz on I_{nu+1}/I_nu = 1/(b1 + 1/(b2 + ...)), b_k = 2(nu+k)/x
    f = TINY
    c = f
    d = 0.0
    xi2 = 2.0 / x
    for k in range(1, MAXIT):
        b = (nu + k) * xi2
        d = b + d
        if d == 0.0:
            d = TINY
        d = 1.0 / d
        c = b + 1.0 / c
        if c == 0.0:
            c = TINY
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < EPS:
            break
    return f


def _log_cf(nu: float, x: float) -> float:
    nl = int(nu + 0.5)
    mu = nu - nl
    r = _ratio_cf1(nu, x)
    # Steed's CF2 for e^x K_mu(x) and e^x K_{mu+1}(x)
    xi = 1.0 / x
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25 - mu * mu
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < EPS:
            break
    h = a1 * h
    kmu = math.sqrt(math.pi / (2.0 * x)) / s
    k1 = kmu * (mu + x + 0.5 - h) * xi
    scale = 0.0
    for i in range(1, nl + 1):
        knext = (mu + i) * 2.0 * xi * k1 + kmu
        kmu = k1
        k1 = knext
        if k1 > RESCALE:
            k1 /= RESCALE
            kmu /= RESCALE
            scale += LOG_RESCALE
    # Wronskian: I_nu K_{nu+1} + I_{nu+1} K_nu = 1/x
    return x - math.log(x) - math.log(k1 + r * kmu) - scale


def _use_debye(nu: float, x: float) -> bool:
    return nu >= DEBYE_NU and x >= DEBYE_ZMIN * nu


def _use_series(nu: float, x: float) -> bool:
    return x <= max(SERIES_X, 0.5 * nu)


def _use_hankel(nu: float, x: float) -> bool:
    return x >= max(HANKEL_X, 2.0 * nu * nu)


def log_bessel_i(nu: float, x: float) -> float:
    if x == 0.0:
        return 0.0 if nu == 0.0 else -math.inf
    if _use_debye(nu, x):
        return _log_debye(nu, x)
    if _use_series(nu, x):
        return nu * math.log(0.5 * x) - math.lgamma(nu + 1.0) + math.log1p(_series_sum(nu, x))
    if _use_hankel(nu, x):
        return _log_hankel(nu, x)
    return _log_cf(nu, x)


def bessel_i_ratio(nu: float, x: float) -> float:
    if _use_debye(nu, x):
        return _ratio_debye(nu, x)
    if _use_hankel(nu, x):
        return _hankel_sum(nu + 1.0, x) / _hankel_sum(nu, x)
    return _ratio_cf1(nu, x)


def scaled_bessel_term(nu: float, z: float, s: float) -> float:
    x = 0.5 * s * z
    if x == 0.0 or (not _use_debye(nu, x) and _use_series(nu, x)):
        # z^{-nu} cancels analytically against the series prefactor
        tail = _series_sum(nu, x) if x > 0.0 else 0.0
        return (nu * math.log(0.25 * s) - math.lgamma(nu + 1.0) + math.log1p(tail)) / s
    return (-nu * math.log(z) + log_bessel_i(nu, x)) / s


def ratio_over_z(nu: float, z: float, s: float) -> float:
    """I_{nu+1}(sz/2) / (z I_nu(sz/2)), with its finite limit at z = 0."""
    if z == 0.0:
        return s / (4.0 * (nu + 1.0))
    return bessel_i_ratio(nu, 0.5 * s * z) / z


def dyn_value_grad(a0, a1, a2, c0, c1, c2, n, t, rho, v, lam):
    """Objective of the dynamic panel and its gradient in (rho, v, lam).

    The data enter through the six quadratic-form coefficients of
    tr(DWD') and 1'DWD'1 as functions of rho.
    """
    big_a = a0 - 2.0 * rho * a1 + rho * rho * a2
    cc = c0 - 2.0 * rho * c1 + rho * rho * c2
    if cc < 0.0:
        cc = 0.0
    nu = 0.5 * (n - 2.0)
    z = 2.0 * math.sqrt(lam * cc / v)
    sterm = scaled_bessel_term(nu, z, n)
    value = -0.5 * math.log(v) - big_a / (2.0 * v * t) - 0.5 * lam + sterm / t
    rz = ratio_over_z(nu, z, n)
    d_a = -2.0 * a1 + 2.0 * rho * a2
    d_c = -2.0 * c1 + 2.0 * rho * c2
    g_rho = -d_a / (2.0 * v * t) + rz * lam * d_c / (v * t)
    g_v = -0.5 / v + big_a / (2.0 * v * v * t) - rz * lam * cc / (v * v * t)
    g_lam = -0.5 + rz * cc / (v * t)
    return value, g_rho, g_v, g_lam


def iv_value_grad(p00, p01, p11, m00, m01, m11, k, n, beta, lam):
    """Objective of the IV model and its gradient in (beta, lam).

    ``p`` holds Sigma^{-1} and ``m`` holds Sigma^{-1} W Sigma^{-1}.
    """
    s = p00 * beta * beta + 2.0 * p01 * beta + p11
    pq = m00 * beta * beta + 2.0 * m01 * beta + m11
    if pq < 0.0:
        pq = 0.0
    nu = 0.5 * (k - 2.0)
    z = 2.0 * math.sqrt(lam * pq)
    value = -0.5 * lam * s + scaled_bessel_term(nu, z, n)
    rz = ratio_over_z(nu, z, n)
    d_s = 2.0 * (p00 * beta + p01)
    d_p = 2.0 * (m00 * beta + m01)
    g_beta = -0.5 * lam * d_s + rz * lam * d_p
    g_lam = -0.5 * s + rz * pq
    return value, g_beta, g_lam
