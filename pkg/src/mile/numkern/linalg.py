"""Small symmetric-matrix utilities."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True, eq=False)
class SymMat:
    """Symmetric matrix stored as its column-wise lower triangle.

    Parameters
    ----------
    dim : int
        Matrix dimension.
    lower : ndarray
        ``vech`` of the matrix, length ``dim (dim + 1) / 2``.
    """

    dim: int
    lower: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("SymMat dimension must be >= 1")
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        if lower.size != self.dim * (self.dim + 1) // 2:
            raise DomainError("lower-triangle length does not match dimension")
        lower.setflags(write=False)
        object.__setattr__(self, "lower", lower)

    @classmethod
    def from_array(cls, a, *, atol: float = 1e-10) -> "SymMat":
        """Build from a full square array, symmetrizing tiny asymmetries."""
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"expected a square matrix, got shape {a.shape}")
        scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
        if not np.allclose(a, a.T, rtol=0.0, atol=atol * scale):
            raise DomainError("matrix is not symmetric")
        a = 0.5 * (a + a.T)
        return cls(a.shape[0], _vech_array(a))

    def to_array(self) -> np.ndarray:
        """Full ``dim x dim`` ndarray (a fresh copy)."""
        return _unvech_array(self.lower, self.dim)

    def __array__(self, dtype=None, copy=None):
        out = self.to_array()
        return out if dtype is None else out.astype(dtype)


def _vech_array(a: np.ndarray) -> np.ndarray:
    # column-wise lower triangle == row-wise upper triangle of the transpose
    rows, cols = np.triu_indices(a.shape[0])
    return a.T[rows, cols].copy()


def _unvech_array(v: np.ndarray, d: int) -> np.ndarray:
    out = np.zeros((d, d))
    rows, cols = np.triu_indices(d)
    out[cols, rows] = v
    out[rows, cols] = v
    return out


def _as_array(s) -> np.ndarray:
    if isinstance(s, SymMat):
        return s.to_array()
    a = np.asarray(s, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    return a


def vech(s) -> np.ndarray:
    """Stack the lower triangle column by column."""
    if isinstance(s, SymMat):
        return s.lower.copy()
    return _vech_array(_as_array(s))


def unvech(v) -> SymMat:
    """Inverse of :func:`vech`."""
    v = np.asarray(v, dtype=float).reshape(-1)
    d = int(round((np.sqrt(8 * v.size + 1) - 1) / 2))
    if d * (d + 1) // 2 != v.size:
        raise DomainError(f"length {v.size} is not triangular")
    return SymMat(d, v)


def duplication(dim: int) -> np.ndarray:
    """Duplication matrix ``D`` with ``D @ vech(S) == vec(S)``.

    ``vec`` stacks columns, so ``vec(S)[i + j*dim] = S[i, j]``.
    """
    if dim < 1:
        raise DomainError("dimension must be >= 1")
    m = dim * (dim + 1) // 2
    out = np.zeros((dim * dim, m))
    k = 0
    for j in range(dim):
        for i in range(j, dim):
            out[i + j * dim, k] = 1.0
            out[j + i * dim, k] = 1.0
            k += 1
    return out


def sym_eig(s) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition with eigenvalues in descending order.

    Returns
    -------
    w : ndarray
        Eigenvalues, largest first.
    v : ndarray
        Orthonormal eigenvectors as columns, matching ``w``.
    """
    a = _as_array(s)
    a = 0.5 * (a + a.T)
    w, v = np.linalg.eigh(a)
    return w[::-1].copy(), v[:, ::-1].copy()
