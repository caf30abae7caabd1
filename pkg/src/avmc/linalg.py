"""Dense small-matrix primitives: norms, SVD, singular-value soft-thresholding,
box projection and the symmetric dilation embedding.

All functions are pure and operate on validated 2-D float arrays. The SVD is
delegated to the active kernel backend (compiled Jacobi or LAPACK fallback);
non-convergence raises :class:`SVDError` rather than returning garbage.
"""

from __future__ import annotations

import numpy as np

from ._backend import kernels

NORM_KINDS = ("frobenius", "nuclear", "operator", "max")


class SVDError(RuntimeError):
    """The singular value decomposition iteration failed to converge."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return ``a`` as a 2-D float64 array with finite entries."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return np.ascontiguousarray(arr)


def matrix_norm(m, kind: str = "frobenius") -> float:
    """Frobenius, nuclear (sum of singular values), operator (largest singular
    value) or element-wise max norm."""
    arr = as_matrix(m)
    if kind == "frobenius":
        return float(np.linalg.norm(arr))
    if kind == "max":
        return float(np.max(np.abs(arr)))
    if not arr.any():
        return 0.0
    if kind == "operator":
        return _call(kernels.op_norm, arr)
    if kind == "nuclear":
        return float(np.sum(_call(kernels.singular_values, arr)))
    raise ValueError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}")


def _call(fn, *args):
    try:
        return fn(*args)
    except (RuntimeError, np.linalg.LinAlgError) as exc:
        raise SVDError(str(exc)) from exc


def svd(m):
    """Economy SVD ``(U, s, V)`` with ``m = U @ diag(s) @ V.T``, ``s`` nonincreasing."""
    return _call(kernels.svd, as_matrix(m))


def singular_value_soft_threshold(m, tau: float) -> np.ndarray:
    """Shrink all singular values by ``tau`` (floored at zero): the proximal
    operator of ``tau * nuclear_norm``."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    u, s, v = svd(m)
    return (u * np.maximum(s - tau, 0.0)) @ v.T


def box_project(m, gamma: float) -> np.ndarray:
    """Clip every entry into ``[-gamma, gamma]``."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return np.clip(as_matrix(m), -gamma, gamma)


def dilation(x) -> np.ndarray:
    """Embed a d1 x d2 matrix as the symmetric ``[[0, X], [X^T, 0]]`` block
    matrix, which has the same operator norm."""
    arr = as_matrix(x)
    d1, d2 = arr.shape
    out = np.zeros((d1 + d2, d1 + d2))
    out[:d1, d1:] = arr
    out[d1:, :d1] = arr.T
    return out
