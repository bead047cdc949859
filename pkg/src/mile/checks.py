"""Fast self-check suite behind ``mile check``.

Each check returns ``(name, passed, detail)``.  Reference values for the
Bessel kernels were computed once in 40-digit arithmetic and are frozen
here, so the suite has no run-time dependency on an arbitrary-precision
library.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import dyn_panel as dp
from . import iv_model as iv
from .numkern import bessel_i_ratio, log_bessel_i, log_gamma, scaled_bessel_term

# name -> (evaluator, reference value, relative tolerance)
FROZEN = {
    "ln I_499(600)": (lambda: log_bessel_i(499.0, 600.0), 398.2909634028315296162336, 1e-12),
    "I_6(7.5)/I_5(7.5)": (lambda: bessel_i_ratio(5.0, 7.5), 0.4899221910452616612361669, 1e-12),
    "scaled term nu=999 z=1.3 s=2000": (lambda: scaled_bessel_term(999.0, 1.3, 2000.0),
                                         0.3328236861561756429860335, 1e-10),
    "ln Gamma(10)": (lambda: log_gamma(10.0), 12.80182748008146961120772, 1e-14),
    "ln I_{-1/2}(1)": (lambda: log_bessel_i(-0.5, 1.0),
                       math.log(math.sqrt(2.0 / math.pi) * math.cosh(1.0)), 1e-14),
}


def _bessel_checks():
    out = []
    for name, (fn, ref, tol) in FROZEN.items():
        got = fn()
        err = abs(got - ref) / abs(ref)
        out.append((f"bessel: {name}", err <= tol, f"rel err {err:.2e}"))
    return out


def _fd_grad(f: Callable, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h * max(1.0, abs(x[j]))
        g[j] = (f(x + e) - f(x - e)) / (2 * e[j])
    return g


def _gradient_checks(rng: np.random.Generator):
    out = []
    sigma = np.array([[1.0, 0.3], [0.3, 1.0]])
    worst = 0.0
    for _ in range(5):
        th = iv.ThetaIV(rng.uniform(-1, 1), rng.uniform(0.2, 2))
        w = iv.simulate_w_iv(th, sigma, 5, 500, rng)
        x = th.as_array()
        g = iv.score_iv(w, th, sigma)
        fd = _fd_grad(lambda z: iv.loglik_iv(w, iv.ThetaIV(*z), sigma), x)
        worst = max(worst, float(np.max(np.abs(g - fd) / np.maximum(1.0, np.abs(fd)))))
    out.append(("score: iv analytic vs finite differences", worst < 1e-6, f"max rel err {worst:.2e}"))
    worst = 0.0
    for _ in range(5):
        th = dp.ThetaDyn(rng.uniform(-0.8, 0.9), rng.uniform(0.5, 2), rng.uniform(0.2, 3))
        y = dp.simulate_dyn(200, 5, th.rho, th.sigma2, lambda g, n: 2 * g.standard_normal(n), rng=rng)
        w = dp.wishart_stat_dyn(y.Y)
        x = th.as_array()
        g = dp.score_dyn(w, th)
        fd = _fd_grad(lambda z: dp.loglik_dyn(w, dp.ThetaDyn(*z)), x)
        worst = max(worst, float(np.max(np.abs(g - fd) / np.maximum(1.0, np.abs(fd)))))
    out.append(("score: dyn analytic vs finite differences", worst < 1e-6, f"max rel err {worst:.2e}"))
    return out


def _limlk_check(rng: np.random.Generator):
    sigma = np.array([[1.0, 0.3], [0.3, 1.0]])
    worst = 0.0
    for _ in range(20):
        th = iv.ThetaIV(rng.uniform(-1, 1), rng.uniform(0.5, 2))
        w = iv.simulate_w_iv(th, sigma, 5, 2000, rng)
        diff = abs(iv.mile_iv(w, sigma, std_errors=False).theta.beta - iv.limlk(w, sigma))
        worst = max(worst, diff)
    return [("iv: MILE beta equals LIMLK", worst <= 1e-6, f"max |diff| {worst:.2e}")]


def _info_checks(rng: np.random.Generator):
    worst = 0.0
    for _ in range(20):
        th = iv.ThetaIV(rng.uniform(-2, 2), rng.uniform(0.1, 3))
        c = rng.uniform(-0.8, 0.8)
        sd = rng.uniform(0.5, 2, size=2)
        sigma = np.array([[sd[0] ** 2, c * sd[0] * sd[1]], [c * sd[0] * sd[1], sd[1] ** 2]])
        alpha = rng.uniform(0, 1)
        got = iv.info_iv(th, sigma, alpha).inverse()[0, 0]
        ref = iv.asyvar_limlk(th, sigma, alpha)
        worst = max(worst, abs(got - ref) / ref)
    out = [("info: iv inverse (1,1) equals LIMLK variance", bool(worst <= 1e-10), f"max rel err {worst:.2e}")]
    worst = 0.0
    for rho in (-0.5, 0.0, 0.5):
        got = dp.info_T(rho, 1.0, 1.0, 500).inverse()[0, 0]
        worst = max(worst, abs(got - (1 - rho * rho)) / (1 - rho * rho))
    out.append(("info: dyn T=500 inverse (1,1) near 1 - rho^2", bool(worst <= 0.01), f"max rel err {worst:.2e}"))
    return out


def run_checks(seed: int = 0) -> list[tuple[str, bool, str]]:
    """Run every check with a generator seeded by ``seed``."""
    rng = np.random.default_rng(seed)
    out = []
    out += _bessel_checks()
    out += _gradient_checks(rng)
    out += _limlk_check(rng)
    out += _info_checks(rng)
    return out
