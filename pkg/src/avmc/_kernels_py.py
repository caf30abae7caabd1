"""Pure-numpy implementations of the hot numerical kernels.

This module mirrors the interface of the compiled extension ``avmc._kernels``
and is selected at import time when the extension is unavailable (or when
``AVMC_BACKEND=python`` is set). LAPACK via ``np.linalg`` plays the role of
the extension's Jacobi SVD; non-convergence surfaces as ``LinAlgError``,
never as silent garbage.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_FAMILY_GAUSSIAN = 0
_FAMILY_BINOMIAL = 1
_FAMILY_POISSON = 2


def svd(a):
    """Economy SVD ``a = U @ diag(s) @ V.T`` with ``s`` nonincreasing."""
    u, s, vh = np.linalg.svd(np.ascontiguousarray(a, dtype=np.float64),
                             full_matrices=False)
    return u, s, vh.T


def singular_values(a):
    return np.linalg.svd(np.ascontiguousarray(a, dtype=np.float64),
                         compute_uv=False)


def op_norm(a):
    a = np.asarray(a, dtype=np.float64)
    if not a.any():
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def cumulative_opnorm_scan(rows, cols, eps, d1, d2):
    """Operator norm of the running sum ``sum_{i<=k} eps[i] * E(rows[i], cols[i])``.

    Returns one value per step. ``E(r, c)`` is the single-entry indicator
    matrix, so each step touches one entry of the accumulator.
    """
    rows = np.asarray(rows)
    cols = np.asarray(cols)
    eps = np.asarray(eps, dtype=np.float64)
    n = eps.shape[0]
    out = np.empty(n)
    acc = np.zeros((d1, d2))
    for k in range(n):
        acc[rows[k], cols[k]] += eps[k]
        out[k] = np.linalg.svd(acc, compute_uv=False)[0]
    return out


def martingale_violation_elementary(rows, cols, eps, d1, d2, threshold, budget):
    """Early-exit scan for the event ``exists k: ||M_k||_op >= threshold and S_k <= budget``.

    ``S_k`` here is the un-normalized policy statistic (max row/column visit
    count); it is nondecreasing, so the scan stops once it passes ``budget``.
    """
    rows = np.asarray(rows)
    cols = np.asarray(cols)
    eps = np.asarray(eps, dtype=np.float64)
    acc = np.zeros((d1, d2))
    row_counts = np.zeros(d1, dtype=np.int64)
    col_counts = np.zeros(d2, dtype=np.int64)
    s_k = 0
    for k in range(eps.shape[0]):
        r, c = rows[k], cols[k]
        acc[r, c] += eps[k]
        row_counts[r] += 1
        col_counts[c] += 1
        s_k = max(s_k, row_counts[r], col_counts[c])
        if s_k > budget:
            return False
        if np.linalg.svd(acc, compute_uv=False)[0] >= threshold:
            return True
    return False


def martingale_violation_dense(mats, eps, threshold, budget):
    """Dense-matrix variant: ``S_k = max(||sum X X^T||_op, ||sum X^T X||_op)``."""
    mats = np.asarray(mats, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    _, d1, d2 = mats.shape
    acc = np.zeros((d1, d2))
    gram_left = np.zeros((d1, d1))
    gram_right = np.zeros((d2, d2))
    for k in range(eps.shape[0]):
        x = mats[k]
        acc += eps[k] * x
        gram_left += x @ x.T
        gram_right += x.T @ x
        s_k = max(np.linalg.svd(gram_left, compute_uv=False)[0],
                  np.linalg.svd(gram_right, compute_uv=False)[0])
        if s_k > budget:
            return False
        if np.linalg.svd(acc, compute_uv=False)[0] >= threshold:
            return True
    return False


def _link(family, par, x, order):
    if family == _FAMILY_GAUSSIAN:
        if order == 0:
            return 0.5 * par * par * x * x
        return par * par * x
    if family == _FAMILY_BINOMIAL:
        if order == 0:
            return par * np.logaddexp(0.0, x)
        return par / (1.0 + np.exp(-x))
    if order == 0 or family == _FAMILY_POISSON:
        return np.exp(x)
    raise ValueError(f"unknown family code {family}")


def _svt(a, tau):
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return (u * np.maximum(s - tau, 0.0)) @ vh


def prox_grad_fit(counts, ysums, t_obs, family, par, lam, gamma,
                  step0, max_iters, rel_tol, fp_tol, theta0):
    """Projected proximal gradient for the penalized, box-constrained loss.

    One iteration: gradient step on the averaged negative log-likelihood,
    singular-value soft-threshold with ``step * lam``, clip into
    ``[-gamma, gamma]``. Backtracking halves the step whenever the penalized
    objective would increase; raises ``RuntimeError`` if the step underflows.

    Returns ``(theta, iterations, converged)`` where convergence means both
    the relative objective change fell below ``rel_tol`` and the iterate
    displacement (the fixed-point gap) fell below ``fp_tol``.
    """
    counts = np.asarray(counts, dtype=np.float64)
    ysums = np.asarray(ysums, dtype=np.float64)
    theta = np.array(theta0, dtype=np.float64, copy=True)

    def objective(th):
        phi = float((counts * _link(family, par, th, 0) - ysums * th).sum()) / t_obs
        return phi + lam * float(np.linalg.svd(th, compute_uv=False).sum())

    step = step0
    f_cur = objective(theta)
    best_f, best_theta = f_cur, theta
    iterations = 0
    converged = False
    for iterations in range(1, max_iters + 1):
        grad = (counts * _link(family, par, theta, 1) - ysums) / t_obs
        while True:
            cand = np.clip(_svt(theta - step * grad, step * lam), -gamma, gamma)
            f_new = objective(cand)
            if f_new <= f_cur + 1e-12 * max(1.0, abs(f_cur)):
                break
            step *= 0.5
            if step < step0 * 1e-20:
                raise RuntimeError("proximal gradient step size underflow")
        displacement = float(np.linalg.norm(cand - theta))
        rel_change = abs(f_cur - f_new) / max(1.0, abs(f_cur))
        theta, f_cur = cand, f_new
        if f_cur < best_f:
            best_f, best_theta = f_cur, theta
        if rel_change < rel_tol and displacement <= fp_tol:
            converged = True
            break
    return np.array(best_theta), iterations, converged
