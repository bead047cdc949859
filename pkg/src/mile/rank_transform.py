"""Rank likelihood for the panel transformation model.

Model: ``h_i(y_{it}) = x_{it}'beta + u_{it}`` with unknown strictly increasing
``h_i`` and ``u_{it} ~ N(0, 1)``.  Within-individual ranks are maximal
invariant under the group of monotone transformations, and their
probability mass function is

    f(m; beta) = (1/T!) E[exp(sum_t V_(m_t) x_t'beta)] exp(-|x beta|^2 / 2),

where ``V_(1) < ... < V_(T)`` are standard normal order statistics.  The
expectation is replaced by an average over a fixed table of ``R`` sorted
normal samples (common random numbers), which keeps the objective smooth
and deterministic in ``beta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EstimationError, TieError
from .numkern import OptimizerSpec, maximize
from .report import EstimateReport, theta_as_dict

BETA_BOUNDS = (-50.0, 50.0)
_CHUNK_BYTES = 256 * 1024 * 1024


def compute_ranks(y_row) -> np.ndarray:
    """Ranks ``M_t = #{s : y_s <= y_t}`` of one individual's outcomes.

    Raises
    ------
    TieError
        If two outcomes are equal.
    """
    y = np.asarray(y_row, dtype=float).reshape(-1)
    if not np.all(np.isfinite(y)):
        raise DomainError("outcomes must be finite")
    order = np.argsort(y, kind="stable")
    srt = y[order]
    if np.any(srt[1:] == srt[:-1]):
        raise TieError("tied outcomes within an individual")
    ranks = np.empty(y.size, dtype=np.int64)
    ranks[order] = np.arange(1, y.size + 1)
    return ranks


@dataclass(frozen=True, eq=False)
class RankVector:
    """Per-individual ranks, each row a permutation of ``1..T``."""

    ranks: np.ndarray

    def __post_init__(self):
        r = np.array(self.ranks, dtype=np.int64)
        if r.ndim == 1:
            r = r[None, :]
        t = r.shape[1]
        if not np.all(np.sort(r, axis=1) == np.arange(1, t + 1)):
            raise DomainError("each row of ranks must be a permutation of 1..T")
        r.setflags(write=False)
        object.__setattr__(self, "ranks", r)

    @classmethod
    def from_outcomes(cls, y) -> "RankVector":
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            y = y[None, :]
        return cls(np.vstack([compute_ranks(row) for row in y]))


@dataclass(frozen=True, eq=False)
class RankData:
    """Outcomes ``y`` (N x T) and regressors ``x`` (N x T x K) with ``T > K``."""

    y: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        y = np.array(self.y, dtype=float)
        x = np.array(self.x, dtype=float)
        if y.ndim != 2:
            raise DomainError("y must be an N x T matrix")
        if x.ndim == 2:
            x = x[:, :, None]
        if x.shape[:2] != y.shape:
            raise DomainError("x must have shape N x T x K matching y")
        if not y.shape[1] > x.shape[2]:
            raise DomainError("the rank model needs T > K")
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


@dataclass(frozen=True)
class ThetaRank:
    """Slope vector ``beta``."""

    beta: tuple

    def as_dict(self) -> dict:
        return theta_as_dict(self)


def crn_table(R: int, T: int, rng: np.random.Generator) -> np.ndarray:
    """``R x T`` table of sorted iid standard normal samples (ascending)."""
    if R < 1:
        raise DomainError("need at least one draw")
    return np.sort(rng.standard_normal((R, T)), axis=1)


def _logmeanexp(a: np.ndarray, axis: int = -1) -> np.ndarray:
    top = np.max(a, axis=axis, keepdims=True)
    out = np.log(np.mean(np.exp(a - top), axis=axis)) + np.squeeze(top, axis=axis)
    return out


def rank_log_pmf_mc(m_row, x_row, beta, draws: int | None = None,
                    rng: np.random.Generator | None = None,
                    table: np.ndarray | None = None) -> float:
    """Monte Carlo log pmf of one individual's rank vector.

    Parameters
    ----------
    m_row : array of int
        Ranks (a permutation of ``1..T``).
    x_row : ndarray
        ``T x K`` regressors.
    beta : array_like
        Slope vector of length ``K``.
    draws : int
        Number of ordered samples ``R`` (ignored when ``table`` is given).
    rng : numpy.random.Generator
        Source for the ordered samples.
    table : ndarray, optional
        Precomputed :func:`crn_table`.
    """
    m = np.asarray(m_row, dtype=np.int64).reshape(-1)
    t = m.size
    x = np.asarray(x_row, dtype=float).reshape(t, -1)
    b = np.asarray(beta, dtype=float).reshape(-1)
    if table is None:
        if draws is None or rng is None:
            raise DomainError("provide either a CRN table or (draws, rng)")
        table = crn_table(int(draws), t, rng)
    xb = x @ b
    a = table[:, m - 1] @ xb
    return float(-math.lgamma(t + 1) + _logmeanexp(a) - 0.5 * float(xb @ xb))


class RankObjective:
    """Average rank log-likelihood with fixed common random numbers.

    Parameters
    ----------
    data : RankData
    table : ndarray
        Either one ``R x T`` table shared by all individuals, or an
        ``N x R x T`` stack with a separate table per individual.  Either
        way the draws are fixed, so the objective is deterministic in
        ``beta``.
    """

    def __init__(self, data: RankData, table: np.ndarray):
        table = np.asarray(table, dtype=float)
        if table.shape[-1] != data.T:
            raise DomainError("CRN table width must equal T")
        if table.ndim == 3 and table.shape[0] != data.N:
            raise DomainError("per-individual CRN tables must have N rows")
        if table.ndim not in (2, 3):
            raise DomainError("CRN table must be R x T or N x R x T")
        self.data = data
        self.table = table
        self.ranks = RankVector.from_outcomes(data.y).ranks
        n, r, k = data.N, table.shape[-2], data.K
        chunk = max(1, int(_CHUNK_BYTES // max(1, r * max(k, data.T) * 8)))
        # G_i = V_i[:, m_i - 1] @ x_i, shape N x R x K, built once
        self._proj = np.concatenate(
            [self._projections(lo, min(n, lo + chunk)) for lo in range(0, n, chunk)], axis=0)
        self._lgt = math.lgamma(data.T + 1)

    def _projections(self, lo: int, hi: int) -> np.ndarray:
        idx = self.ranks[lo:hi] - 1
        if self.table.ndim == 2:
            v = self.table[:, idx].transpose(1, 0, 2)                   # n x R x T
        else:
            v = np.take_along_axis(self.table[lo:hi], idx[:, None, :], axis=2)
        return np.einsum("nrt,ntk->nrk", v, self.data.x[lo:hi])

    def per_individual(self, beta) -> np.ndarray:
        """Log pmf of each individual's rank vector at ``beta``."""
        b = np.asarray(beta, dtype=float).reshape(-1)
        xb = self.data.x @ b
        return _logmeanexp(self._proj @ b, axis=1) - 0.5 * np.sum(xb * xb, axis=1) - self._lgt

    def __call__(self, beta) -> float:
        return float(np.mean(self.per_individual(beta)))


def _check_identified(data: RankData) -> None:
    if data.K == 0:
        return
    d = (data.x[:, 1:, :] - data.x[:, :1, :]).reshape(-1, data.K)
    if np.linalg.matrix_rank(d) < data.K:
        raise EstimationError("regressor differences are rank deficient; beta is not identified")


def estimate_rank(data: RankData, R: int, rng: np.random.Generator, *,
                  starts: list | None = None, tol: float = 1e-8,
                  max_iter: int = 2000) -> EstimateReport:
    """Rank-likelihood estimate of ``beta`` with common random numbers.

    Each individual gets its own table of ``R`` ordered normal samples,
    drawn once from ``rng`` and reused at every ``beta``; the simplex
    search then maximizes a smooth, deterministic objective.  Separate
    tables keep the Monte Carlo errors of different individuals
    independent, so they average out instead of compounding.  The default
    starts are ``0`` and ``+-0.5`` in every coordinate.
    """
    if R < 1:
        raise DomainError("R must be >= 1")
    if data.K < 1:
        raise DomainError("the rank model needs at least one regressor")
    _check_identified(data)
    table = np.sort(rng.standard_normal((data.N, int(R), data.T)), axis=2)
    obj = RankObjective(data, table)
    k = data.K
    if starts is None:
        starts = [np.zeros(k), np.full(k, 0.5), np.full(k, -0.5)]
    spec = OptimizerSpec(bounds=[BETA_BOUNDS] * k, starts=starts, tol=tol, max_iter=max_iter)
    res = maximize(obj, None, spec)
    names = [f"beta_{i + 1}" for i in range(k)]
    return EstimateReport(
        model="rank",
        theta=ThetaRank(tuple(float(v) for v in res.argmax)),
        value=res.value,
        converged=res.converged,
        at_boundary=dict(zip(names, res.at_boundary)),
        iterations=res.iterations,
        std_errors=None,
        n_obs=data.N,
        extra={"R": int(R), "T": data.T},
    )
