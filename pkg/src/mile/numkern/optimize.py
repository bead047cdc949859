"""Box-constrained maximization with multistart.

Smooth objectives with an analytic gradient go through L-BFGS-B (a
projected quasi-Newton method with line search); objectives without a
gradient use a bounded Nelder-Mead simplex.  Both come from scipy.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize as _sopt

from ..errors import DomainError, OptimizationError

_BIG = 1e300


@dataclass(frozen=True)
class OptimizerSpec:
    """Bounds, tolerance, iteration cap and start points.

    Parameters
    ----------
    bounds : sequence of (lower, upper)
        Per-coordinate box; use ``-inf`` / ``inf`` for open sides.
    starts : sequence of array_like
        Start points, tried in order.
    tol : float
        Projected-gradient tolerance (sup norm) for declaring convergence;
        for the simplex path, the tolerance on the simplex size.
    max_iter : int
        Iteration cap per start.
    """

    bounds: Sequence[tuple[float, float]]
    starts: Sequence = field(default_factory=list)
    tol: float = 1e-7
    max_iter: int = 1000

    def __post_init__(self):
        b = np.asarray(self.bounds, dtype=float)
        if b.ndim != 2 or b.shape[1] != 2:
            raise DomainError("bounds must be a sequence of (lower, upper) pairs")
        if np.any(~(b[:, 0] < b[:, 1])):
            raise DomainError("each lower bound must be below its upper bound")
        if not self.tol > 0:
            raise DomainError("tolerance must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be >= 1")
        object.__setattr__(self, "bounds", [tuple(map(float, r)) for r in b])
        object.__setattr__(
            self, "starts", [np.asarray(s, dtype=float).reshape(-1) for s in self.starts]
        )
        for s in self.starts:
            if s.size != len(self.bounds):
                raise DomainError("start point dimension does not match bounds")

    @property
    def lower(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds])


@dataclass(frozen=True)
class OptResult:
    """Outcome of :func:`maximize`."""

    argmax: np.ndarray
    value: float
    converged: bool
    at_boundary: tuple[bool, ...]
    iterations: int
    grad_norm: float = float("nan")


def projected_gradient(x, g, lower, upper, rtol: float = 1e-10) -> np.ndarray:
    """Ascent gradient with components blocked by active bounds zeroed."""
    x = np.asarray(x, dtype=float)
    pg = np.array(g, dtype=float)
    at_lo = _at(x, lower, rtol)
    at_hi = _at(x, upper, rtol)
    pg[at_lo & (pg < 0)] = 0.0
    pg[at_hi & (pg > 0)] = 0.0
    return pg


def _at(x, bound, rtol):
    bound = np.asarray(bound, dtype=float)
    finite = np.isfinite(bound)
    out = np.zeros(x.shape, dtype=bool)
    out[finite] = np.abs(x[finite] - bound[finite]) <= rtol * np.maximum(1.0, np.abs(bound[finite]))
    return out


def boundary_flags(x, spec: OptimizerSpec, rtol: float = 1e-8) -> tuple[bool, ...]:
    x = np.asarray(x, dtype=float)
    return tuple(bool(v) for v in (_at(x, spec.lower, rtol) | _at(x, spec.upper, rtol)))


def _combined(objective, gradient):
    """Return f(x) -> (value, grad) for the three supported call styles."""
    if gradient is True:
        return lambda x: objective(x)
    return lambda x: (objective(x), gradient(x))


def maximize(
    objective: Callable,
    gradient: Callable | bool | None = None,
    spec: OptimizerSpec | None = None,
) -> OptResult:
    """Maximize ``objective`` over the box in ``spec``, best of all starts.

    Parameters
    ----------
    objective : callable
        ``objective(x) -> float``; when ``gradient is True`` it must
        return ``(value, gradient)`` instead.
    gradient : callable, True or None
        Analytic gradient, ``True`` for a combined objective, or ``None``
        for the derivative-free path.
    spec : OptimizerSpec
        Bounds, starts and tolerances.

    Returns
    -------
    OptResult
        The best point found.  ``converged`` means the projected gradient
        sup-norm is within ``spec.tol`` (gradient path) or the simplex met
        its tolerance (derivative-free path).

    Raises
    ------
    OptimizationError
        If the objective is non-finite at every start.
    """
    if spec is None or not spec.starts:
        raise DomainError("maximize needs an OptimizerSpec with at least one start")
    lower, upper = spec.lower, spec.upper
    best: OptResult | None = None
    for x0 in spec.starts:
        x0 = np.clip(x0, lower, upper)
        if gradient is None:
            res = _run_simplex(objective, x0, spec)
        else:
            res = _run_gradient(_combined(objective, gradient), x0, spec)
        if res is None:
            continue
        if best is None or res.value > best.value:
            best = res
    if best is None:
        raise OptimizationError("objective is not finite at any start point")
    return best


def _run_gradient(fg, x0, spec: OptimizerSpec) -> OptResult | None:
    v0, _ = fg(x0)
    if not np.isfinite(v0):
        return None

    def neg(x):
        v, g = fg(x)
        if not np.isfinite(v):
            return _BIG, np.zeros_like(x)
        return -v, -np.asarray(g, dtype=float)

    bounds = [(None if not np.isfinite(lo) else lo, None if not np.isfinite(hi) else hi)
              for lo, hi in spec.bounds]
    total_iter = 0
    x = x0
    for _ in range(3):
        out = _sopt.minimize(
            neg, x, jac=True, method="L-BFGS-B", bounds=bounds,
            options={"maxiter": spec.max_iter, "gtol": 0.1 * spec.tol, "ftol": 1e-15,
                     "maxcor": 20},
        )
        total_iter += int(out.nit)
        x = np.clip(out.x, spec.lower, spec.upper)
        value, g = fg(x)
        pg = projected_gradient(x, g, spec.lower, spec.upper)
        gnorm = float(np.max(np.abs(pg))) if pg.size else 0.0
        if gnorm <= spec.tol or total_iter >= spec.max_iter:
            break
    return OptResult(
        argmax=x, value=float(value), converged=bool(gnorm <= spec.tol),
        at_boundary=boundary_flags(x, spec), iterations=total_iter, grad_norm=gnorm,
    )


def _run_simplex(f, x0, spec: OptimizerSpec) -> OptResult | None:
    v0 = f(x0)
    if not np.isfinite(v0):
        return None

    def neg(x):
        v = f(x)
        return -v if np.isfinite(v) else _BIG

    bounds = [(None if not np.isfinite(lo) else lo, None if not np.isfinite(hi) else hi)
              for lo, hi in spec.bounds]
    out = _sopt.minimize(
        neg, x0, method="Nelder-Mead", bounds=bounds,
        options={"maxiter": spec.max_iter, "xatol": spec.tol, "fatol": 1e-12,
                 "adaptive": x0.size > 2},
    )
    x = np.clip(out.x, spec.lower, spec.upper)
    return OptResult(
        argmax=x, value=float(f(x)), converged=bool(out.success),
        at_boundary=boundary_flags(x, spec), iterations=int(out.nit),
    )
