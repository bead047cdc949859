"""Invariant likelihood for the static linear panel with fixed effects.

Model: ``y_i = eta_i 1 + x_i beta + u_i`` with ``u_i ~ N(0, sigma2 S(rho))``
where ``S(rho)`` is the stationary AR(1) correlation matrix scaled by
``1/(1-rho^2)``.  First differences ``m_i = D y_i`` remove ``eta_i`` and are
maximal invariant under adding a common constant to each individual's
outcomes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy import optimize as sopt

from .errors import DomainError, EstimationError
from .numkern import SymMat
from .report import EstimateReport, theta_as_dict

RHO_BOUNDS = (-0.99, 0.99)
SIGMA2_BOUNDS = (1e-8, 1e8)
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class StaticPanelData:
    """Outcomes ``y`` (N x T) and regressors ``x`` (N x T x K)."""

    y: np.ndarray
    x: np.ndarray | None = None

    def __post_init__(self):
        y = np.array(self.y, dtype=float)
        if y.ndim != 2:
            raise DomainError("y must be an N x T matrix")
        n, t = y.shape
        if n < 1 or t < 2:
            raise DomainError(f"need N >= 1 and T >= 2, got N={n}, T={t}")
        x = np.zeros((n, t, 0)) if self.x is None else np.array(self.x, dtype=float)
        if x.ndim == 2:
            x = x[:, :, None]
        if x.shape[:2] != (n, t):
            raise DomainError("x must have shape N x T x K matching y")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
            raise DomainError("data contain missing or non-finite values")
        y.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)

    @property
    def N(self) -> int:
        return self.y.shape[0]

    @property
    def T(self) -> int:
        return self.y.shape[1]

    @property
    def K(self) -> int:
        return self.x.shape[2]


@dataclass(frozen=True, eq=False)
class ThetaStatic:
    """Parameter point ``(beta, sigma2, rho)``."""

    beta: np.ndarray
    sigma2: float
    rho: float

    def __post_init__(self):
        b = np.array(self.beta, dtype=float).reshape(-1)
        b.setflags(write=False)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "sigma2", float(self.sigma2))
        object.__setattr__(self, "rho", float(self.rho))
        if not self.sigma2 > 0:
            raise DomainError("sigma2 must be positive")
        if not abs(self.rho) < 1:
            raise DomainError("|rho| must be below one")

    def as_dict(self) -> dict:
        return theta_as_dict(self)


def diff_matrix(T: int) -> np.ndarray:
    """``(T-1) x T`` first-difference matrix with rows ``(.., 1, -1, ..)``."""
    if T < 2:
        raise DomainError("diff_matrix needs T >= 2")
    return np.eye(T - 1, T) - np.eye(T - 1, T, k=1)


def ar1_cov(rho: float, T: int) -> SymMat:
    """Stationary AR(1) covariance with unit innovation variance."""
    if not abs(rho) < 1:
        raise DomainError("ar1_cov needs |rho| < 1")
    lag = np.abs(np.subtract.outer(np.arange(T), np.arange(T)))
    return SymMat.from_array(float(rho) ** lag / (1.0 - rho * rho))


def _whitener(rho: float, T: int):
    d = diff_matrix(T)
    c = d @ ar1_cov(rho, T).to_array() @ d.T
    chol = sla.cholesky(c, lower=True)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    return d, chol, logdet


def _whiten(data: StaticPanelData, rho: float):
    # returns whitened differenced y (N x T-1) and x (N x T-1 x K), and log|DSD'|
    d, chol, logdet = _whitener(rho, data.T)
    dy = data.y @ d.T
    wy = sla.solve_triangular(chol, dy.T, lower=True).T
    if data.K:
        dx = np.einsum("st,ntk->nsk", d, data.x)
        flat = dx.transpose(1, 0, 2).reshape(data.T - 1, -1)
        wx = sla.solve_triangular(chol, flat, lower=True).reshape(data.T - 1, data.N, data.K)
        wx = wx.transpose(1, 0, 2)
    else:
        wx = np.zeros((data.N, data.T - 1, 0))
    return wy, wx, logdet


def loglik_static(data: StaticPanelData, theta: ThetaStatic) -> float:
    """Sum over individuals of the Gaussian log-density of ``D y_i``."""
    if theta.beta.size != data.K:
        raise DomainError("beta length does not match K")
    wy, wx, logdet = _whiten(data, theta.rho)
    resid = wy - wx @ theta.beta if data.K else wy
    rss = float(np.sum(resid * resid))
    n, m = data.N, data.T - 1
    return (-0.5 * n * m * (_LOG_2PI + math.log(theta.sigma2)) - 0.5 * n * logdet
            - rss / (2.0 * theta.sigma2))


def _profile(data: StaticPanelData, rho: float):
    """GLS beta and mean quadratic form at fixed rho, with the profiled value."""
    wy, wx, logdet = _whiten(data, rho)
    n, m, k = data.N, data.T - 1, data.K
    if k:
        xx = wx.reshape(-1, k)
        yy = wy.reshape(-1)
        gram = xx.T @ xx
        try:
            cf = sla.cho_factor(gram)
        except sla.LinAlgError as exc:
            raise EstimationError("differenced regressors are collinear") from exc
        if np.linalg.cond(gram) > 1e13:
            raise EstimationError("differenced regressors are collinear")
        beta = sla.cho_solve(cf, xx.T @ yy)
        resid = yy - xx @ beta
    else:
        beta = np.zeros(0)
        resid = wy.reshape(-1)
    rss = float(resid @ resid)
    s2_hat = rss / (n * m)
    s2 = min(max(s2_hat, SIGMA2_BOUNDS[0]), SIGMA2_BOUNDS[1])
    value = -0.5 * n * m * (_LOG_2PI + math.log(s2)) - 0.5 * n * logdet - rss / (2.0 * s2)
    return value, beta, s2


def profile_loglik_static(data: StaticPanelData, rho: float) -> float:
    """Log-likelihood maximized over ``(beta, sigma2)`` at fixed ``rho``."""
    return _profile(data, rho)[0]


def _numeric_hessian(f, x, h=1e-4):
    k = x.size
    out = np.empty((k, k))
    steps = h * np.maximum(1.0, np.abs(x))
    for i in range(k):
        for j in range(i, k):
            ei = np.zeros(k)
            ej = np.zeros(k)
            ei[i] = steps[i]
            ej[j] = steps[j]
            v = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * steps[i] * steps[j])
            out[i, j] = out[j, i] = v
    return out


def estimate_static(data: StaticPanelData, *, grid: int = 41, xtol: float = 1e-10) -> EstimateReport:
    """Maximum invariant likelihood estimate of ``(beta, sigma2, rho)``.

    ``beta`` and ``sigma2`` are profiled out in closed form, leaving a
    bounded one-dimensional search over ``rho``: a coarse grid followed by
    Brent refinement around the best grid point.
    """
    n, t, k = data.N, data.T, data.K
    if not n * (t - 1) > k + 2:
        raise DomainError("not enough degrees of freedom: need N (T - 1) > K + 2")
    lo, hi = RHO_BOUNDS
    rhos = np.linspace(lo, hi, grid)
    vals = np.array([_profile(data, r)[0] for r in rhos])
    j = int(np.argmax(vals))
    a, b = rhos[max(j - 1, 0)], rhos[min(j + 1, grid - 1)]
    out = sopt.minimize_scalar(lambda r: -_profile(data, r)[0], bounds=(a, b), method="bounded",
                               options={"xatol": xtol})
    rho = float(out.x)
    value, beta, s2 = _profile(data, rho)
    if vals[j] > value:
        rho, (value, beta, s2) = float(rhos[j]), _profile(data, float(rhos[j]))
    theta = ThetaStatic(beta, s2, rho)
    rho_edge = abs(rho - lo) < 1e-6 or abs(rho - hi) < 1e-6
    s2_edge = s2 <= SIGMA2_BOUNDS[0] * (1 + 1e-12) or s2 >= SIGMA2_BOUNDS[1] * (1 - 1e-12)
    at_boundary = {"beta": False, "sigma2": bool(s2_edge), "rho": bool(rho_edge)}

    ses = None
    if not (rho_edge or s2_edge):
        x0 = np.concatenate([beta, [s2, rho]])

        def full(x):
            return loglik_static(data, ThetaStatic(x[:k], x[k], x[k + 1]))

        hess = _numeric_hessian(full, x0)
        try:
            cov = np.linalg.inv(-hess)
            diag = np.diag(cov)
            if np.all(diag > 0):
                se = np.sqrt(diag)
                ses = {f"beta_{i + 1}": float(se[i]) for i in range(k)}
                ses.update(sigma2=float(se[k]), rho=float(se[k + 1]))
        except np.linalg.LinAlgError:
            ses = None
    return EstimateReport(
        model="static",
        theta=theta,
        value=value,
        converged=bool(out.success),
        at_boundary=at_boundary,
        iterations=int(out.nfev) + grid,
        std_errors=ses,
        n_obs=n,
        extra={"T": t, "K": k},
    )
