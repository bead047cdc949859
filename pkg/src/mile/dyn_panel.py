"""Invariant likelihood for the AR(1) panel with individual fixed effects.

Model: ``y_{i,t} = rho y_{i,t-1} + eta_i + u_{i,t}`` with ``y_{i,0} = 0`` and
``u_{i,t} ~ N(0, sigma^2)``.  Stacking periods, ``Y = eta (B 1)' + U B'``
where ``B`` is the lower-triangular matrix of powers of ``rho``.  The
statistic ``W = Y'Y / N`` is maximal invariant under rotations of the
cross-section, and its law depends on the effects only through
``lam = eta'eta / (N sigma^2)``.

Every evaluation of the objective reduces to six scalars of ``W``, so the
cost of one likelihood evaluation does not grow with ``T``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateDataError, DomainError
from .numkern import OptimizerSpec, SymMat, maximize, vech
from .numkern._backend import kernels
from .report import EstimateReport, InfoMatrix, theta_as_dict

RHO_BOUNDS = (-2.0, 2.0)
SIGMA2_BOUNDS = (1e-8, 1e8)
LAM_BOUNDS = (0.0, 1e6)
LABELS = ("rho", "sigma2", "lam")


@dataclass(frozen=True, eq=False)
class DynPanelData:
    """Outcomes ``Y`` (N x T) with initial condition fixed at zero."""

    Y: np.ndarray

    def __post_init__(self):
        y = np.array(self.Y, dtype=float)
        if y.ndim != 2 or y.shape[0] < 1 or y.shape[1] < 1:
            raise DomainError(f"Y must be a non-empty N x T matrix, got shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise DomainError("Y contains missing or non-finite values")
        y.setflags(write=False)
        object.__setattr__(self, "Y", y)

    @property
    def N(self) -> int:
        return self.Y.shape[0]

    @property
    def T(self) -> int:
        return self.Y.shape[1]


@dataclass(frozen=True)
class ThetaDyn:
    """Parameter point ``(rho, sigma2, lam)``."""

    rho: float
    sigma2: float
    lam: float

    def __post_init__(self):
        for name in ("rho", "sigma2", "lam"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not math.isfinite(self.rho):
            raise DomainError("rho must be finite")
        if not self.sigma2 > 0:
            raise DomainError(f"sigma2 must be positive, got {self.sigma2}")
        if not self.lam >= 0:
            raise DomainError(f"lam must be non-negative, got {self.lam}")

    def as_array(self) -> np.ndarray:
        return np.array([self.rho, self.sigma2, self.lam])

    def as_dict(self) -> dict:
        return theta_as_dict(self)


@dataclass(frozen=True, eq=False)
class WStatDyn:
    """Scaled cross-product ``W = Y'Y / N`` with its sample sizes.

    When ``N < T`` the matrix is singular; the objective below omits the
    determinant term anyway, so the same criterion serves as the
    pseudo-likelihood in that case.
    """

    W: SymMat
    N: int
    T: int

    def __post_init__(self):
        w = self.W if isinstance(self.W, SymMat) else SymMat.from_array(self.W)
        object.__setattr__(self, "W", w)
        if w.dim != self.T:
            raise DomainError("W dimension does not match T")
        if self.N < 1:
            raise DomainError("N must be >= 1")

    @classmethod
    def from_matrix(cls, w, n: int, *, check_psd: bool = True) -> "WStatDyn":
        w = np.asarray(w, dtype=float)
        if check_psd:
            _check_psd(w)
        return cls(SymMat.from_array(w), int(n), w.shape[0])

    @property
    def array(self) -> np.ndarray:
        return self.W.to_array()


def _check_psd(w: np.ndarray) -> None:
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise DomainError("W must be square")
    sym = 0.5 * (w + w.T)
    ev = np.linalg.eigvalsh(sym)
    scale = max(float(np.trace(np.abs(sym))), 1e-300)
    if ev[0] < -1e-10 * scale:
        raise DomainError(f"W is not positive semi-definite (min eigenvalue {ev[0]:.3g})")


# ---------------------------------------------------------------------------
# structural matrices


def b_matrix(rho: float, T: int) -> np.ndarray:
    """Lower-triangular ``B`` with entry ``(s, t) = rho^(s-t)`` for ``s >= t``."""
    if T < 1:
        raise DomainError("T must be >= 1")
    lag = np.subtract.outer(np.arange(T), np.arange(T))
    out = np.zeros((T, T))
    mask = lag >= 0
    out[mask] = float(rho) ** lag[mask]
    return out


def d_matrix(rho: float, T: int) -> np.ndarray:
    """``D = I - rho J``, the inverse of :func:`b_matrix`."""
    if T < 1:
        raise DomainError("T must be >= 1")
    return np.eye(T) - float(rho) * np.eye(T, k=-1)


def mean_w(theta: ThetaDyn, T: int) -> np.ndarray:
    """Expected value ``sigma2 B (I + lam 1 1') B'`` of ``W``."""
    b = b_matrix(theta.rho, T)
    b1 = b.sum(axis=1)
    return theta.sigma2 * (b @ b.T + theta.lam * np.outer(b1, b1))


# ---------------------------------------------------------------------------
# data


def _effects_vector(effects, n: int, rng) -> np.ndarray:
    if callable(effects):
        eta = np.asarray(effects(rng, n), dtype=float)
    elif np.isscalar(effects):
        eta = np.full(n, float(effects))
    else:
        eta = np.asarray(effects, dtype=float)
    if eta.shape != (n,):
        raise DomainError(f"effects must have length N={n}")
    return eta


def draw_errors(kind: str, shape, rng) -> np.ndarray:
    """Unit-variance error draws: ``normal`` or centered chi-square(1)."""
    if kind == "normal":
        return rng.standard_normal(shape)
    if kind in ("chisq", "centered_chisq", "centered-chi-square"):
        g = rng.standard_normal(shape)
        return (g * g - 1.0) / math.sqrt(2.0)
    raise DomainError(f"unknown error law {kind!r}")


def simulate_dyn(
    N: int,
    T: int,
    rho: float,
    sigma2: float,
    effects: np.ndarray | float | Callable = 0.0,
    errors: str = "normal",
    rng: np.random.Generator | None = None,
) -> DynPanelData:
    """Simulate ``Y = eta (B 1)' + U B'`` with ``y_0 = 0``.

    Parameters
    ----------
    N, T : int
        Cross-section and time dimensions.
    rho, sigma2 : float
        Autoregressive coefficient and error variance (``sigma2 > 0``).
    effects : array, float or callable
        Fixed effects; a callable is invoked as ``effects(rng, N)``.
    errors : {'normal', 'chisq'}
        Error law, scaled to variance ``sigma2``.
    rng : numpy.random.Generator
        Source of randomness.
    """
    if not sigma2 > 0:
        raise DomainError("sigma2 must be positive")
    if N < 1 or T < 1:
        raise DomainError("N and T must be >= 1")
    rng = np.random.default_rng() if rng is None else rng
    eta = _effects_vector(effects, N, rng)
    u = math.sqrt(sigma2) * draw_errors(errors, (N, T), rng)
    y = np.empty((N, T))
    prev = np.zeros(N)
    for t in range(T):
        prev = rho * prev + eta + u[:, t]
        y[:, t] = prev
    return DynPanelData(y)


def wishart_stat_dyn(Y) -> WStatDyn:
    """``W = Y'Y / N``."""
    y = Y.Y if isinstance(Y, DynPanelData) else np.asarray(Y, dtype=float)
    if y.ndim != 2:
        raise DomainError("Y must be two-dimensional")
    n = y.shape[0]
    w = y.T @ y / n
    return WStatDyn(SymMat.from_array(0.5 * (w + w.T)), n, y.shape[1])


def _as_wstat(obj) -> WStatDyn:
    if isinstance(obj, WStatDyn):
        return obj
    if isinstance(obj, DynPanelData):
        return wishart_stat_dyn(obj)
    raise DomainError("expected WStatDyn or DynPanelData")


def sufficient_scalars(w: WStatDyn) -> tuple[float, ...]:
    """Coefficients of ``tr(DWD')`` and ``1'DWD'1`` as quadratics in rho.

    ``tr(DWD') = a0 - 2 rho a1 + rho^2 a2`` and
    ``1'DWD'1 = c0 - 2 rho c1 + rho^2 c2``.
    """
    a = w.array
    t = w.T
    ones = np.ones(t)
    e = ones.copy()
    e[-1] = 0.0
    tr = float(np.trace(a))
    a1 = float(np.trace(a, offset=1))
    a2 = tr - float(a[-1, -1])
    we = a @ e
    return tr, a1, a2, float(ones @ a @ ones), float(ones @ we), float(e @ we)


# ---------------------------------------------------------------------------
# likelihood and scores


def loglik_dyn(w, theta: ThetaDyn) -> float:
    """Theta-dependent part of the log-likelihood of ``W`` divided by ``N T``.

    ``Q = -ln(s2)/2 - tr(DWD')/(2 s2 T) - lam/2
    + (1/(N T)) ln(Z^{-nu} I_nu(N Z / 2))`` with ``nu = (N-2)/2`` and
    ``Z = 2 sqrt(lam 1'DWD'1 / s2)``.
    """
    w = _as_wstat(w)
    st = sufficient_scalars(w)
    return kernels.dyn_value_grad(*st, float(w.N), float(w.T), theta.rho, theta.sigma2, theta.lam)[0]


def _value_grad(st, n, t, x):
    v, g0, g1, g2 = kernels.dyn_value_grad(*st, float(n), float(t), x[0], x[1], x[2])
    return v, np.array([g0, g1, g2])


def score_dyn(w, theta: ThetaDyn, regime: str = "exact") -> np.ndarray:
    """Gradient of the objective in ``(rho, sigma2, lam)``.

    Parameters
    ----------
    regime : {'exact', 'large_n', 'large_t'}
        ``exact`` differentiates the Bessel objective of :func:`loglik_dyn`.
        ``large_n`` differentiates the large-N surrogate in which the
        Bessel term becomes ``(sqrt(1+Z^2) - ln(1+sqrt(1+Z^2)))/(2T)``.
        ``large_t`` is the limiting form where that term is ``Z/(2T)``.
    """
    if not theta.sigma2 > 0:
        raise DomainError("sigma2 must be positive")
    w = _as_wstat(w)
    st = sufficient_scalars(w)
    if regime == "exact":
        return _value_grad(st, w.N, w.T, theta.as_array())[1]
    a0, a1, a2, c0, c1, c2 = st
    rho, v, lam, t = theta.rho, theta.sigma2, theta.lam, float(w.T)
    big_a = a0 - 2 * rho * a1 + rho * rho * a2
    cc = max(c0 - 2 * rho * c1 + rho * rho * c2, 0.0)
    z = 2.0 * math.sqrt(lam * cc / v)
    if regime == "large_n":
        rz = 1.0 / (1.0 + math.sqrt(1.0 + z * z))
    elif regime == "large_t":
        if z == 0.0:
            raise DomainError("the large_t score needs lam > 0 and 1'DWD'1 > 0")
        rz = 1.0 / z
    else:
        raise DomainError(f"unknown regime {regime!r}")
    d_a = -2 * a1 + 2 * rho * a2
    d_c = -2 * c1 + 2 * rho * c2
    return np.array([
        -d_a / (2 * v * t) + rz * lam * d_c / (v * t),
        -0.5 / v + big_a / (2 * v * v * t) - rz * lam * cc / (v * v * t),
        -0.5 + rz * cc / (v * t),
    ])


def surrogate_loglik_dyn(w, theta: ThetaDyn) -> float:
    """Large-N surrogate objective whose gradient is the ``large_n`` score."""
    w = _as_wstat(w)
    a0, a1, a2, c0, c1, c2 = sufficient_scalars(w)
    rho, v, lam, t = theta.rho, theta.sigma2, theta.lam, float(w.T)
    big_a = a0 - 2 * rho * a1 + rho * rho * a2
    cc = max(c0 - 2 * rho * c1 + rho * rho * c2, 0.0)
    sq = math.sqrt(1.0 + 4.0 * lam * cc / v)
    return -0.5 * math.log(v) - big_a / (2 * v * t) - 0.5 * lam + (sq - math.log1p(sq)) / (2 * t)


def hessian_dyn(w, theta: ThetaDyn, h: float = 1e-5) -> np.ndarray:
    """Hessian of :func:`loglik_dyn` by central differences of the score."""
    w = _as_wstat(w)
    st = sufficient_scalars(w)
    x = theta.as_array()
    out = np.empty((3, 3))
    for j in range(3):
        step = h * max(1.0, abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += step
        xm[j] -= step
        if j == 2 and xm[j] < 0:
            xm[j] = x[j]
            xp[j] = x[j] + 2 * step
            gp = _value_grad(st, w.N, w.T, xp)[1]
            gm = _value_grad(st, w.N, w.T, xm)[1]
            out[:, j] = (gp - gm) / (2 * step)
            continue
        gp = _value_grad(st, w.N, w.T, xp)[1]
        gm = _value_grad(st, w.N, w.T, xm)[1]
        out[:, j] = (gp - gm) / (2 * step)
    return 0.5 * (out + out.T)


def moment_dyn(w, theta: ThetaDyn) -> np.ndarray:
    """First-moment condition ``vech(W - sigma2 B (I + lam 1 1') B')``."""
    w = _as_wstat(w)
    return vech(w.array - mean_w(theta, w.T))


# ---------------------------------------------------------------------------
# estimation


def within_from_w(w: WStatDyn) -> tuple[float, float]:
    """Within-OLS slope and residual variance computed from ``W`` alone.

    Both are quadratic forms in each ``y_i`` so they only need ``Y'Y``.
    """
    a = w.array
    t = w.T
    m = np.eye(t) - 1.0 / t
    j = np.eye(t, k=-1)
    num = float(np.trace(j.T @ m @ a))
    den = float(np.trace(j.T @ m @ j @ a))
    if not den > 1e-300:
        raise DegenerateDataError("lagged outcomes have no within variation")
    rho = num / den
    d = d_matrix(rho, t)
    resid = float(np.trace(d.T @ m @ d @ a)) / max(t - 1, 1)
    return rho, resid


def starting_values(w: WStatDyn) -> ThetaDyn:
    """Within-OLS rho, its residual variance, moment-implied lam (floored at 0)."""
    try:
        rho0, s0 = within_from_w(w)
    except DegenerateDataError:
        rho0, s0 = 0.0, float(np.trace(w.array)) / w.T
    rho0 = float(np.clip(rho0, *RHO_BOUNDS))
    s0 = float(np.clip(s0, 1e-6, SIGMA2_BOUNDS[1]))
    # (1,1) element of the moment condition: W_11 = s2 (1 + lam)
    lam0 = max(0.0, w.array[0, 0] / s0 - 1.0)
    return ThetaDyn(rho0, s0, min(lam0, LAM_BOUNDS[1]))


def _multistarts(theta0: ThetaDyn) -> list[np.ndarray]:
    x0 = theta0.as_array()
    return [x0, x0 * 1.1, x0 * 0.9]


def mile_dyn(
    data,
    *,
    tol: float = 1e-7,
    max_iter: int = 1000,
    starts: list | None = None,
    std_errors: bool = True,
) -> EstimateReport:
    """Maximum invariant likelihood estimate of ``(rho, sigma2, lam)``.

    Parameters
    ----------
    data : DynPanelData, WStatDyn or array
        Outcomes (``N x T``) or the statistic ``W``.
    tol, max_iter : optimizer controls.
    starts : list of array_like, optional
        Overrides the default three moment-based starts.
    std_errors : bool
        Attach plug-in standard errors from the information matrix.

    Returns
    -------
    EstimateReport
    """
    if isinstance(data, np.ndarray):
        data = DynPanelData(data)
    w = _as_wstat(data)
    if w.T < 2:
        raise DomainError("the dynamic panel estimator needs T >= 2")
    a = w.array
    ev = np.linalg.eigvalsh(a)
    if ev[-1] <= 0 or np.sum(ev > 1e-10 * ev[-1]) < 2:
        raise DegenerateDataError("W has rank < 2; the outcomes carry no error variation")
    st = sufficient_scalars(w)
    theta0 = starting_values(w)
    spec = OptimizerSpec(
        bounds=[RHO_BOUNDS, SIGMA2_BOUNDS, LAM_BOUNDS],
        starts=starts if starts is not None else _multistarts(theta0),
        tol=tol,
        max_iter=max_iter,
    )
    res = maximize(lambda x: _value_grad(st, w.N, w.T, x), True, spec)
    theta = ThetaDyn(*res.argmax)
    ses = None
    if std_errors and theta.lam > 0:
        try:
            inv = np.linalg.inv(info_T(theta.rho, theta.sigma2, theta.lam, w.T).matrix)
            diag = np.diag(inv) / (w.N * w.T)
            if np.all(diag > 0):
                ses = dict(zip(LABELS, np.sqrt(diag).tolist()))
        except (np.linalg.LinAlgError, DomainError):
            ses = None
    return EstimateReport(
        model="dyn",
        theta=theta,
        value=res.value,
        converged=res.converged,
        at_boundary=dict(zip(LABELS, res.at_boundary)),
        iterations=res.iterations,
        std_errors=ses,
        n_obs=w.N,
        extra={"T": w.T, "grad_norm": res.grad_norm, "start": theta0.as_dict()},
    )


# ---------------------------------------------------------------------------
# information matrices


def f_sums(rho: float, T: int) -> tuple[float, float, float]:
    """``tr(FF')``, ``1'F1`` and ``1'F'F1`` for ``F = J B(rho)``.

    Row ``k`` of ``F`` holds ``rho^0..rho^(k-1)`` and column ``t`` holds
    ``rho^0..rho^(T-2-t)``, so all three reduce to partial geometric sums
    and cost O(T).
    """
    if T < 1:
        raise DomainError("T must be >= 1")
    pw = float(rho) ** np.arange(T - 1)
    g = np.concatenate([[0.0], np.cumsum(pw)])          # g[m] = sum_{j<m} rho^j
    g2 = np.concatenate([[0.0], np.cumsum(pw * pw)])
    return float(np.sum(g2)), float(np.sum(g)), float(np.sum(g * g))


def info_T(rho: float, sigma2: float, lam: float, T: int, *, printed: bool = False) -> InfoMatrix:
    """Fixed-T information matrix of ``sqrt(NT)`` times the score.

    Parameters
    ----------
    rho, sigma2, lam : float
        True parameter point (``lam > 0``).
    T : int
        Number of periods.
    printed : bool
        If True, return the closed form with four entries replaced by their
        large-T limits (the version usually quoted).  The default is the
        exact fixed-T limit of the Hessian, which differs in the (1,2),
        (2,2), (2,3) and (3,3) entries by terms of order 1/T.

    Notes
    -----
    With ``q = 1 + 2 lam T`` the default entries are

    * (1,1): ``tr(FF')/T + lam 1'F'F1/T + 2 lam^2 (1'F1)^2/(qT)
      - lam/(1+lam T) (1'F'F1/T + lam (1'F1)^2/T)``
    * (1,2): ``lam^2 1'F1 / (sigma2 q)``
    * (1,3): ``(1 + lam T) 1'F1 / (q T)``
    * (2,2): ``(1/2 + lam^2 T/(2q)) / sigma2^2``
    * (2,3): ``(1 + lam T) / (2 sigma2 q)``
    * (3,3): ``T / (2q)``
    """
    if not lam > 0:
        raise DomainError("info_T requires lam > 0")
    if not sigma2 > 0:
        raise DomainError("info_T requires sigma2 > 0")
    if T < 1:
        raise DomainError("T must be >= 1")
    tff, f1, fff = f_sums(rho, T)
    q = 1.0 + 2.0 * lam * T
    i11 = (tff / T + lam * fff / T + 2 * lam**2 * f1**2 / (q * T)
           - lam / (1 + lam * T) * (fff / T + lam * f1**2 / T))
    i13 = (1 + lam * T) / q * f1 / T
    if printed:
        i12 = lam / (2 * sigma2) * f1 / T
        i22 = 1 / (2 * sigma2**2) + lam / (4 * sigma2) * (2 * lam * T / q)
        i23 = 1 / (4 * sigma2)
        i33 = 1 / (4 * lam)
    else:
        i12 = lam**2 * f1 / (sigma2 * q)
        i22 = (0.5 + lam**2 * T / (2 * q)) / sigma2**2
        i23 = (1 + lam * T) / (2 * sigma2 * q)
        i33 = T / (2 * q)
    m = np.array([[i11, i12, i13], [i12, i22, i23], [i13, i23, i33]])
    return InfoMatrix(LABELS, m)


def info_inf(rho: float, sigma2: float, lam: float) -> InfoMatrix:
    """Large-T limit of :func:`info_T` for ``|rho| < 1``."""
    if not abs(rho) < 1:
        raise DomainError("info_inf requires |rho| < 1")
    if not lam > 0:
        raise DomainError("info_inf requires lam > 0")
    if not sigma2 > 0:
        raise DomainError("info_inf requires sigma2 > 0")
    r1 = 1 - rho
    m = np.array([
        [1 / (1 - rho**2) + lam / r1**2, lam / (2 * sigma2 * r1), 1 / (2 * r1)],
        [lam / (2 * sigma2 * r1), (2 + lam) / (4 * sigma2**2), 1 / (4 * sigma2)],
        [1 / (2 * r1), 1 / (4 * sigma2), 1 / (4 * lam)],
    ])
    return InfoMatrix(LABELS, m)
