"""Invariant likelihood for the linear IV model with known error covariance.

Reduced form: ``Y = [y1, y2] = Z pi a' + V`` with ``a = (beta, 1)'`` and rows
of ``V`` iid ``N(0, Sigma)``.  The statistic ``W = Y' N_Z Y / N`` is maximal
invariant under rotations of the instrument space; its law depends on the
first-stage coefficients only through ``lam = pi'Z'Z pi / N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EstimationError, TieError
from .numkern import OptimizerSpec, SymMat, maximize, sym_eig, vech
from .numkern._backend import kernels
from .report import EstimateReport, InfoMatrix, theta_as_dict

BETA_BOUNDS = (-50.0, 50.0)
LAM_BOUNDS = (0.0, 1e3)
LABELS = ("beta", "lam")


def _sigma_array(sigma) -> np.ndarray:
    s = sigma.to_array() if isinstance(sigma, SymMat) else np.asarray(sigma, dtype=float)
    if s.shape != (2, 2):
        raise DomainError(f"Sigma must be 2 x 2, got shape {s.shape}")
    if not np.allclose(s, s.T, atol=1e-12 * max(1.0, np.abs(s).max())):
        raise DomainError("Sigma must be symmetric")
    s = 0.5 * (s + s.T)
    if np.linalg.eigvalsh(s)[0] <= 0:
        raise DomainError("Sigma must be positive definite")
    return s


@dataclass(frozen=True, eq=False)
class IVData:
    """Outcomes, instruments and the known reduced-form covariance."""

    y1: np.ndarray
    y2: np.ndarray
    Z: np.ndarray
    Sigma: np.ndarray

    def __post_init__(self):
        y1 = np.asarray(self.y1, dtype=float).reshape(-1)
        y2 = np.asarray(self.y2, dtype=float).reshape(-1)
        z = np.asarray(self.Z, dtype=float)
        if z.ndim == 1:
            z = z[:, None]
        n = y1.size
        if y2.size != n or z.shape[0] != n:
            raise DomainError("y1, y2 and Z must have the same number of rows")
        k = z.shape[1]
        if not n > k >= 1:
            raise DomainError(f"need N > K >= 1, got N={n}, K={k}")
        for arr in (y1, y2, z):
            if not np.all(np.isfinite(arr)):
                raise DomainError("data contain missing or non-finite values")
        object.__setattr__(self, "y1", y1)
        object.__setattr__(self, "y2", y2)
        object.__setattr__(self, "Z", z)
        object.__setattr__(self, "Sigma", _sigma_array(self.Sigma))

    @property
    def N(self) -> int:
        return self.y1.size

    @property
    def K(self) -> int:
        return self.Z.shape[1]


@dataclass(frozen=True)
class ThetaIV:
    """Parameter point ``(beta, lam)``."""

    beta: float
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "lam", float(self.lam))
        if not math.isfinite(self.beta):
            raise DomainError("beta must be finite")
        if not self.lam >= 0:
            raise DomainError(f"lam must be non-negative, got {self.lam}")

    @property
    def a(self) -> np.ndarray:
        return np.array([self.beta, 1.0])

    @property
    def b(self) -> np.ndarray:
        return np.array([1.0, -self.beta])

    def as_array(self) -> np.ndarray:
        return np.array([self.beta, self.lam])

    def as_dict(self) -> dict:
        return theta_as_dict(self)


@dataclass(frozen=True, eq=False)
class WStatIV:
    """``W = Y' N_Z Y / N`` with the number of instruments and observations."""

    W: SymMat
    K: int
    N: int

    def __post_init__(self):
        w = self.W if isinstance(self.W, SymMat) else SymMat.from_array(self.W)
        if w.dim != 2:
            raise DomainError("W must be 2 x 2")
        ev = np.linalg.eigvalsh(w.to_array())
        if ev[0] < -1e-10 * max(1.0, abs(ev[-1])):
            raise DomainError("W is not positive semi-definite")
        if self.K < 1 or self.N < 1:
            raise DomainError("K and N must be >= 1")
        object.__setattr__(self, "W", w)

    @property
    def array(self) -> np.ndarray:
        return self.W.to_array()


def instrument_basis(Z) -> np.ndarray:
    """Orthonormal basis of ``col(Z)`` from a thin QR factorization."""
    z = np.asarray(Z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    q, r = np.linalg.qr(z, mode="reduced")
    d = np.abs(np.diag(r))
    if d.size == 0 or d.min() <= 1e-12 * max(d.max(), 1e-300) * max(z.shape):
        raise DomainError("instrument matrix Z is rank deficient")
    return q


def wishart_stat_iv(data: IVData, basis: np.ndarray | None = None) -> WStatIV:
    """``W = Y'Z(Z'Z)^{-1}Z'Y / N`` without forming the projector.

    Parameters
    ----------
    data : IVData
    basis : ndarray, optional
        Precomputed :func:`instrument_basis` of ``data.Z``.
    """
    q = instrument_basis(data.Z) if basis is None else basis
    y = np.column_stack([data.y1, data.y2])
    qy = q.T @ y
    w = qy.T @ qy / data.N
    return WStatIV(SymMat.from_array(0.5 * (w + w.T)), data.K, data.N)


def _quad_parts(w: WStatIV, sigma) -> tuple[float, ...]:
    s = _sigma_array(sigma)
    p = np.linalg.inv(s)
    p = 0.5 * (p + p.T)
    m = p @ w.array @ p
    m = 0.5 * (m + m.T)
    return p[0, 0], p[0, 1], p[1, 1], m[0, 0], m[0, 1], m[1, 1]


def _value_grad(parts, k, n, x):
    v, gb, gl = kernels.iv_value_grad(*parts, float(k), float(n), x[0], x[1])
    return v, np.array([gb, gl])


def loglik_iv(w: WStatIV, theta: ThetaIV, sigma) -> float:
    """Theta-dependent part of the log-likelihood of ``W`` divided by ``N``.

    ``Q = -lam a'S^{-1}a / 2 + (1/N) ln(Z^{-nu} I_nu(N Z / 2))`` with
    ``nu = (K-2)/2`` and ``Z = 2 sqrt(lam a'S^{-1} W S^{-1} a)``.
    """
    return _value_grad(_quad_parts(w, sigma), w.K, w.N, theta.as_array())[0]


def score_iv(w: WStatIV, theta: ThetaIV, sigma, regime: str = "exact",
             alpha: float | None = None) -> np.ndarray:
    """Gradient in ``(beta, lam)``.

    Parameters
    ----------
    regime : {'exact', 'siv', 'mwiv'}
        ``exact`` differentiates :func:`loglik_iv`.  ``siv`` is the
        strong-instrument limit (Bessel term replaced by ``Z/2``).
        ``mwiv`` is the many-weak-instrument limit with ``K/N -> alpha``.
    alpha : float, optional
        Instrument ratio for ``mwiv``; defaults to ``K/N``.
    """
    parts = _quad_parts(w, sigma)
    if regime == "exact":
        return _value_grad(parts, w.K, w.N, theta.as_array())[1]
    p00, p01, p11, m00, m01, m11 = parts
    beta, lam = theta.beta, theta.lam
    s = p00 * beta * beta + 2 * p01 * beta + p11
    pq = max(m00 * beta * beta + 2 * m01 * beta + m11, 0.0)
    z = 2.0 * math.sqrt(lam * pq)
    if regime == "siv":
        if not lam > 0:
            raise DomainError("the siv score needs lam > 0")
        rz = 1.0 / z
    elif regime == "mwiv":
        al = w.K / w.N if alpha is None else float(alpha)
        if not al > 0:
            raise DomainError("mwiv needs alpha > 0")
        rz = 1.0 / (al * (1.0 + math.sqrt(1.0 + (z / al) ** 2)))
    else:
        raise DomainError(f"unknown regime {regime!r}")
    d_s = 2.0 * (p00 * beta + p01)
    d_p = 2.0 * (m00 * beta + m01)
    return np.array([-0.5 * lam * d_s + rz * lam * d_p, -0.5 * s + rz * pq])


def hessian_iv(w: WStatIV, theta: ThetaIV, sigma, h: float = 1e-5) -> np.ndarray:
    """Hessian of :func:`loglik_iv` by central differences of the score."""
    parts = _quad_parts(w, sigma)
    x = theta.as_array()
    out = np.empty((2, 2))
    for j in range(2):
        step = h * max(1.0, abs(x[j]))
        lo = x.copy()
        hi = x.copy()
        lo[j] -= step
        hi[j] += step
        if lo[j] < 0 and j == 1:
            lo[j] = x[j]
            hi[j] = x[j] + 2 * step
        out[:, j] = (_value_grad(parts, w.K, w.N, hi)[1] - _value_grad(parts, w.K, w.N, lo)[1]) / (2 * step)
    return 0.5 * (out + out.T)


def limlk(w: WStatIV, sigma) -> float:
    """LIMLK estimate of beta from the top eigenvector of ``S^{-1/2} W S^{-1/2}``.

    Raises
    ------
    TieError
        If the two eigenvalues coincide (no preferred direction).
    EstimationError
        If the eigenvector is (numerically) horizontal, so beta is unbounded.
    """
    s = _sigma_array(sigma)
    sv, su = sym_eig(s)
    root = su @ np.diag(np.sqrt(sv)) @ su.T
    iroot = su @ np.diag(1.0 / np.sqrt(sv)) @ su.T
    m = iroot @ w.array @ iroot
    ev, vec = sym_eig(m)
    if ev[0] - ev[1] <= 1e-12 * max(abs(ev[0]) + abs(ev[1]), 1e-300):
        raise TieError("top eigenvalue is not simple; LIMLK is not identified")
    a = root @ vec[:, 0]
    if abs(a[1]) < 1e-12 * np.linalg.norm(a):
        raise EstimationError("top eigenvector has zero second coordinate; beta is unbounded")
    return float(a[0] / a[1])


def moment_lam(w: WStatIV, beta: float, sigma) -> float:
    """Moment-based ``lam`` at ``beta``, floored at zero."""
    p00, p01, p11, m00, m01, m11 = _quad_parts(w, sigma)
    s = p00 * beta * beta + 2 * p01 * beta + p11
    pq = m00 * beta * beta + 2 * m01 * beta + m11
    return max(0.0, pq / s**2 - w.K / (w.N * s))


def mile_iv(w: WStatIV, sigma, *, tol: float = 1e-7, max_iter: int = 1000,
            starts: list | None = None, std_errors: bool = True) -> EstimateReport:
    """Maximum invariant likelihood estimate of ``(beta, lam)``.

    The default starts are the LIMLK beta with the moment-based lam, and
    the same point scaled by 1.1 and 0.9.
    """
    if not isinstance(w, WStatIV):
        raise DomainError("mile_iv expects a WStatIV")
    s = _sigma_array(sigma)
    parts = _quad_parts(w, s)
    if starts is None:
        try:
            b0 = float(np.clip(limlk(w, s), *BETA_BOUNDS))
        except (TieError, EstimationError):
            b0 = 0.0
        l0 = min(moment_lam(w, b0, s), LAM_BOUNDS[1])
        x0 = np.array([b0, l0])
        starts = [x0, x0 * 1.1, x0 * 0.9]
    spec = OptimizerSpec(bounds=[BETA_BOUNDS, LAM_BOUNDS], starts=starts, tol=tol, max_iter=max_iter)
    res = maximize(lambda x: _value_grad(parts, w.K, w.N, x), True, spec)
    theta = ThetaIV(*res.argmax)
    ses = None
    if std_errors and theta.lam > 0:
        try:
            inv = np.linalg.inv(info_iv(theta, s, w.K / w.N).matrix)
            ses = dict(zip(LABELS, np.sqrt(np.diag(inv) / w.N).tolist()))
        except (np.linalg.LinAlgError, DomainError):
            ses = None
    return EstimateReport(
        model="iv",
        theta=theta,
        value=res.value,
        converged=res.converged,
        at_boundary=dict(zip(LABELS, res.at_boundary)),
        iterations=res.iterations,
        std_errors=ses,
        n_obs=w.N,
        extra={"K": w.K, "grad_norm": res.grad_norm},
    )


def _abc(theta: ThetaIV, sigma) -> tuple[float, float, float]:
    p = np.linalg.inv(_sigma_array(sigma))
    a = theta.a
    e1 = np.array([1.0, 0.0])
    return float(a @ p @ a), float(e1 @ p @ e1), float(a @ p @ e1)


def info_iv(theta: ThetaIV, sigma, alpha: float = 0.0) -> InfoMatrix:
    """Information matrix ``I_alpha`` at the true point.

    With ``s = a'S^{-1}a``, ``e = e1'S^{-1}e1`` and ``g = a'S^{-1}e1``:

    * (1,1): ``lam^2 [s e (alpha + 2 lam s) + alpha g^2] / [(alpha + lam s)(alpha + 2 lam s)]``
    * (1,2): ``lam g s / (alpha + 2 lam s)``
    * (2,2): ``s^2 / (2 (alpha + 2 lam s))``

    ``alpha = 0`` gives the strong-instrument information.
    """
    lam = theta.lam
    if not lam > 0:
        raise DomainError("info_iv requires lam > 0")
    if not alpha >= 0:
        raise DomainError("alpha must be non-negative")
    s, e, g = _abc(theta, sigma)
    d = alpha + 2 * lam * s
    i11 = lam**2 * (s * e * d + alpha * g * g) / ((alpha + lam * s) * d)
    i12 = lam * g * s / d
    i22 = s * s / (2 * d)
    return InfoMatrix(LABELS, np.array([[i11, i12], [i12, i22]]))


def asyvar_limlk(theta: ThetaIV, sigma, alpha: float = 0.0) -> float:
    """Asymptotic variance of ``sqrt(N)(beta_hat - beta)``.

    ``(sigma_u^2 / lam^2)(lam + alpha / a'S^{-1}a)`` with
    ``sigma_u^2 = b'Sb`` and ``b = (1, -beta)'``.
    """
    lam = theta.lam
    if not lam > 0:
        raise DomainError("asyvar_limlk requires lam > 0")
    s_arr = _sigma_array(sigma)
    b = theta.b
    sigma_u2 = float(b @ s_arr @ b)
    s = float(theta.a @ np.linalg.solve(s_arr, theta.a))
    return sigma_u2 / lam**2 * (lam + alpha / s)


def mean_w_iv(theta: ThetaIV, sigma, K: int, N: int) -> np.ndarray:
    """``E[W] = lam a a' + (K/N) Sigma``."""
    a = theta.a
    return theta.lam * np.outer(a, a) + (K / N) * _sigma_array(sigma)


def md_moment_iv(w: WStatIV, theta: ThetaIV, sigma) -> np.ndarray:
    """First-moment condition ``vech(W) - vech(lam a a' + (K/N) Sigma)``."""
    return vech(w.array) - vech(mean_w_iv(theta, sigma, w.K, w.N))


def simulate_w_iv(theta: ThetaIV, sigma, K: int, N: int, rng: np.random.Generator) -> WStatIV:
    """Draw ``W`` directly in the instrument-space coordinates.

    With an orthonormal instrument basis ``Q``, ``Q'Y = mu a' + E`` where
    ``||mu||^2 = N lam`` and the ``K`` rows of ``E`` are iid ``N(0, Sigma)``;
    the direction of ``mu`` is irrelevant by rotation invariance.
    """
    s = _sigma_array(sigma)
    chol = np.linalg.cholesky(s)
    e = rng.standard_normal((K, 2)) @ chol.T
    mu = np.zeros(K)
    mu[0] = math.sqrt(N * theta.lam)
    x = np.outer(mu, theta.a) + e
    w = x.T @ x / N
    return WStatIV(SymMat.from_array(0.5 * (w + w.T)), K, N)


def simulate_iv(theta: ThetaIV, sigma, Z, rng: np.random.Generator) -> IVData:
    """Simulate ``(y1, y2)`` given instruments ``Z``, with ``pi`` along ``Z'1``
    scaled so that ``pi'Z'Z pi / N = lam``."""
    z = np.asarray(Z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    n, k = z.shape
    s = _sigma_array(sigma)
    pi = np.ones(k)
    zp = z @ pi
    scale = math.sqrt(n * theta.lam / float(zp @ zp)) if theta.lam > 0 else 0.0
    v = rng.standard_normal((n, 2)) @ np.linalg.cholesky(s).T
    y2 = scale * zp + v[:, 1]
    y1 = theta.beta * scale * zp + v[:, 0]
    return IVData(y1, y2, z, s)
