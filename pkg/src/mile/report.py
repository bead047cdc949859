"""Result containers shared by the estimators."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DomainError


@dataclass(frozen=True, eq=False)
class InfoMatrix:
    """Labelled symmetric information matrix.

    Parameters
    ----------
    labels : tuple of str
        Parameter names in row order.
    matrix : ndarray
        Symmetric square matrix.
    """

    labels: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (len(self.labels), len(self.labels)):
            raise DomainError("matrix shape does not match labels")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __getitem__(self, key):
        i, j = key
        if isinstance(i, str):
            i = self.labels.index(i)
        if isinstance(j, str):
            j = self.labels.index(j)
        return float(self.matrix[i, j])

    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)

    @property
    def is_positive_definite(self) -> bool:
        try:
            np.linalg.cholesky(self.matrix)
        except np.linalg.LinAlgError:
            return False
        return True


def _jsonable(v: Any) -> Any:
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


@dataclass
class EstimateReport:
    """Point estimate plus optimizer diagnostics.

    Attributes
    ----------
    model : str
        One of ``static``, ``rank``, ``iv``, ``dyn``.
    theta : object
        The model's parameter dataclass at the optimum.
    value : float
        Objective value at the optimum (theta-dependent part only).
    converged : bool
    at_boundary : dict
        Parameter name -> whether it sits on its box bound.
    iterations : int
    std_errors : dict or None
        Plug-in asymptotic standard errors where available.
    n_obs : int
        Number of cross-section units.
    extra : dict
        Model-specific diagnostics.
    """

    model: str
    theta: Any
    value: float
    converged: bool
    at_boundary: dict[str, bool]
    iterations: int
    std_errors: dict[str, float] | None = None
    n_obs: int = 0
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def params(self) -> dict[str, Any]:
        return self.theta.as_dict()

    def to_dict(self) -> dict[str, Any]:
        return _jsonable({
            "model": self.model,
            "params": self.params,
            "objective": self.value,
            "converged": self.converged,
            "at_boundary": self.at_boundary,
            "iterations": self.iterations,
            "std_errors": self.std_errors,
            "n_obs": self.n_obs,
            "extra": self.extra,
        })


def theta_as_dict(theta) -> dict[str, Any]:
    return {f.name: getattr(theta, f.name) for f in dataclasses.fields(theta)}
