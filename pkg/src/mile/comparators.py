"""Reference fixed-effects estimators of the autoregressive coefficient.

All estimators take the ``N x T`` outcome matrix of the dynamic panel
``y_t = rho y_{t-1} + eta + u_t`` with ``y_0 = 0``.

* within-OLS and its bias-corrected version (BCOLS);
* Arellano-Bond two-step difference GMM (AB);
* Ahn-Schmidt two-step GMM (AS): the AB moments plus the quadratic moments
  ``E[(y_T - rho y_{T-1})(dy_t - rho dy_{t-1})] = 0`` for ``t = 2..T-1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataError, DomainError, EstimationError

RIDGE = 1e-10
_COND_LIMIT = 1e10
RHO_SEARCH = (-2.0, 2.0)


@dataclass(frozen=True)
class ComparatorResult:
    """Estimate of ``rho`` with availability flag and weighting diagnostics.

    ``available`` is false exactly when the estimator is undefined for the
    panel length (AB and AS need ``T >= 3``); ``rho`` is then ``nan``.
    """

    rho: float
    available: bool
    diagnostics: dict = field(default_factory=dict)


def _outcomes(Y) -> np.ndarray:
    y = np.asarray(getattr(Y, "Y", Y), dtype=float)
    if y.ndim != 2:
        raise DomainError("Y must be an N x T matrix")
    if y.shape[1] < 2:
        raise DomainError("need T >= 2")
    if not np.all(np.isfinite(y)):
        raise DomainError("Y contains non-finite values")
    return y


def within_ols(Y) -> float:
    """Within-group OLS of ``y_t`` on ``y_{t-1}``, ``t = 1..T``, with ``y_0 = 0``.

    Both series are demeaned per individual over ``t = 1..T``.

    Raises
    ------
    DegenerateDataError
        If the demeaned lagged outcomes are identically zero.
    """
    y = _outcomes(Y)
    lag = np.concatenate([np.zeros((y.shape[0], 1)), y[:, :-1]], axis=1)
    yd = y - y.mean(axis=1, keepdims=True)
    ld = lag - lag.mean(axis=1, keepdims=True)
    den = float(np.sum(ld * ld))
    scale = float(np.sum(lag * lag))
    if not den > 1e-14 * max(scale, 1e-300):
        raise DegenerateDataError("demeaned lagged outcomes have no variation")
    return float(np.sum(ld * yd)) / den


def bcols(Y) -> ComparatorResult:
    """Bias-corrected within-OLS ``((T+1)/T) rho_ols + 1/T``."""
    y = _outcomes(Y)
    t = y.shape[1]
    r = within_ols(y)
    return ComparatorResult((t + 1) / t * r + 1.0 / t, True, {"within_ols": r})


def _unavailable(T: int) -> ComparatorResult:
    return ComparatorResult(float("nan"), False, {"reason": f"not available for T = {T}"})


def _levels_and_diffs(y: np.ndarray):
    # yy[:, t] = y_t for t = 0..T; dy[:, t] = y_t - y_{t-1} for t = 1..T (column 0 unused)
    n, t = y.shape
    yy = np.concatenate([np.zeros((n, 1)), y], axis=1)
    dy = np.zeros_like(yy)
    dy[:, 1:] = np.diff(yy, axis=1)
    return yy, dy


def _ab_index(T: int):
    # one moment per (t, s) with t = 3..T and instrument y_s, s = 1..t-2
    ts = [(t, s) for t in range(3, T + 1) for s in range(1, t - 1)]
    t_idx = np.array([p[0] for p in ts], dtype=np.int64)
    s_idx = np.array([p[1] for p in ts], dtype=np.int64)
    return t_idx, s_idx


def _ab_moments(y: np.ndarray):
    """Per-individual linear moments ``g_i(rho) = a_i - rho b_i``."""
    yy, dy = _levels_and_diffs(y)
    t_idx, s_idx = _ab_index(y.shape[1])
    inst = yy[:, s_idx]
    return inst * dy[:, t_idx], inst * dy[:, t_idx - 1], inst, t_idx


def _safe_inverse(m: np.ndarray, diag: dict, key: str) -> np.ndarray:
    m = 0.5 * (m + m.T)
    ev = np.linalg.eigvalsh(m)
    top = max(abs(ev[-1]), 1e-300)
    cond = top / max(ev[0], 1e-300) if ev[0] > 0 else float("inf")
    diag[f"cond_{key}"] = float(cond)
    ridged = not cond < _COND_LIMIT
    diag[f"ridge_{key}"] = ridged
    if ridged:
        m = m + RIDGE * top * np.eye(m.shape[0])
    return np.linalg.inv(m)


def _linear_gmm(a_bar: np.ndarray, b_bar: np.ndarray, wt: np.ndarray) -> float:
    den = float(b_bar @ wt @ b_bar)
    if not abs(den) > 1e-300:
        raise EstimationError("GMM denominator vanishes; rho is not identified")
    return float(b_bar @ wt @ a_bar) / den


def arellano_bond(Y) -> ComparatorResult:
    """Two-step difference GMM.

    Equations ``dy_t = rho dy_{t-1} + du_t`` for ``t = 3..T`` with instruments
    ``y_1..y_{t-2}``; ``y_0 = 0`` carries no information and is dropped.  The
    first-step weighting uses the MA(1) structure of ``du`` (2 on the
    diagonal, -1 next to it); the second uses first-step residuals.
    """
    y = _outcomes(Y)
    n, t = y.shape
    if t < 3:
        return _unavailable(t)
    a, b, inst, t_idx = _ab_moments(y)
    diag: dict = {"n_moments": int(a.shape[1])}
    h = 2.0 * (t_idx[:, None] == t_idx[None, :]) - 1.0 * (np.abs(t_idx[:, None] - t_idx[None, :]) == 1)
    w1 = _safe_inverse((inst.T @ inst) * h / n, diag, "step1")
    a_bar, b_bar = a.mean(axis=0), b.mean(axis=0)
    rho1 = _linear_gmm(a_bar, b_bar, w1)
    g = a - rho1 * b
    w2 = _safe_inverse(g.T @ g / n, diag, "step2")
    rho2 = _linear_gmm(a_bar, b_bar, w2)
    diag["rho_step1"] = rho1
    return ComparatorResult(rho2, True, diag)


def _as_moments(y: np.ndarray):
    """All AS moments as ``p0 + rho p1 + rho^2 p2`` per individual."""
    a, b, _, _ = _ab_moments(y)
    yy, dy = _levels_and_diffs(y)
    t = y.shape[1]
    ts = np.arange(2, t)
    yt, yl = yy[:, [t]], yy[:, [t - 1]]
    q0 = yt * dy[:, ts]
    q1 = -(yt * dy[:, ts - 1] + yl * dy[:, ts])
    q2 = yl * dy[:, ts - 1]
    p0 = np.concatenate([a, q0], axis=1)
    p1 = np.concatenate([-b, q1], axis=1)
    p2 = np.concatenate([np.zeros_like(a), q2], axis=1)
    return p0, p1, p2


def _quartic_argmin(c0, c1, c2, wt, lo, hi) -> float:
    # J(rho) = g' W g with g = c0 + rho c1 + rho^2 c2
    coef = np.array([
        c2 @ wt @ c2,
        2 * (c1 @ wt @ c2),
        c1 @ wt @ c1 + 2 * (c0 @ wt @ c2),
        2 * (c0 @ wt @ c1),
        c0 @ wt @ c0,
    ])
    cand = [lo, hi]
    for r in np.roots(np.polyder(coef)):
        if abs(r.imag) < 1e-9 * max(1.0, abs(r.real)) and lo <= r.real <= hi:
            cand.append(float(r.real))
    vals = [np.polyval(coef, c) for c in cand]
    return float(cand[int(np.argmin(vals))])


def ahn_schmidt(Y) -> ComparatorResult:
    """Two-step GMM with the AB moments and the quadratic moments
    ``E[(y_T - rho y_{T-1})(dy_t - rho dy_{t-1})] = 0``, ``t = 2..T-1``.

    The first step is the one-step AB estimate; the second-step weighting
    is the inverse covariance of all moments there.  The quartic objective
    is minimized exactly on ``[-2, 2]`` through the roots of its derivative.
    """
    y = _outcomes(Y)
    n, t = y.shape
    if t < 3:
        return _unavailable(t)
    diag: dict = {}
    ab = arellano_bond(y)
    rho1 = ab.diagnostics["rho_step1"]
    diag["cond_step1"] = ab.diagnostics["cond_step1"]
    diag["ridge_step1"] = ab.diagnostics["ridge_step1"]
    p0, p1, p2 = _as_moments(y)
    diag["n_moments"] = int(p0.shape[1])
    g = p0 + rho1 * p1 + rho1 * rho1 * p2
    w2 = _safe_inverse(g.T @ g / n, diag, "step2")
    rho2 = _quartic_argmin(p0.mean(axis=0), p1.mean(axis=0), p2.mean(axis=0), w2, *RHO_SEARCH)
    diag["rho_step1"] = rho1
    return ComparatorResult(rho2, True, diag)


def moments_ab(Y, rho: float) -> np.ndarray:
    """Per-individual AB moment vectors at ``rho`` (N x L)."""
    a, b, _, _ = _ab_moments(_outcomes(Y))
    return a - rho * b


def moments_as(Y, rho: float) -> np.ndarray:
    """Per-individual AS moment vectors at ``rho``."""
    p0, p1, p2 = _as_moments(_outcomes(Y))
    return p0 + rho * p1 + rho * rho * p2
