"""Monte Carlo validation of the uniform-in-time matrix-noise tail bounds.

For matrix sequences ``X_i`` and centered noise ``eps_i``, the monitored event
is ``exists k <= K: ||sum_{i<=k} X_i eps_i||_op >= threshold and S_k <= budget``
with ``S_k = max(||sum X X^T||_op, ||sum X^T X||_op)`` (un-normalized). The
closed-form tails are

    sub-Gaussian:     (d1+d2) exp(-sqrt(2) thr^2 / (16 sigma^2 budget))
    sub-Exponential:  (d1+d2) exp(-thr^2 / (576 lam^2 budget))   thr <= 24 lam budget / x_max
                      (d1+d2) exp(-thr / (24 lam x_max))          otherwise

Sub-Gaussian noise is simulated as N(0, sigma^2); sub-Exponential noise as a
centered Poisson with mean ``lam^2 / 2`` (its MGF satisfies the class bound
for lam >= 1). Empirical violation rates are one-sided checks: the tails are
conservative and rates sit far below them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .linalg import dilation, matrix_norm
from .models import SUB_EXPONENTIAL, SUB_GAUSSIAN, NoiseClass

MATRIX_SOURCES = ("elementary", "random_bounded")


def subgaussian_tail_bound(threshold: float, budget: float, sigma: float,
                           d1: int, d2: int) -> float:
    if threshold < 0 or budget <= 0 or sigma <= 0:
        raise ValueError("threshold must be >= 0; budget and sigma positive")
    return (d1 + d2) * math.exp(-math.sqrt(2.0) * threshold**2
                                / (16.0 * sigma**2 * budget))


def subexponential_tail_bound(threshold: float, budget: float, lambda_se: float,
                              x_max: float, d1: int, d2: int) -> float:
    if threshold < 0 or budget <= 0 or lambda_se <= 0 or x_max <= 0:
        raise ValueError("threshold must be >= 0; budget, lambda and x_max positive")
    if threshold <= 24.0 * lambda_se * budget / x_max:
        return (d1 + d2) * math.exp(-threshold**2 / (576.0 * lambda_se**2 * budget))
    return (d1 + d2) * math.exp(-threshold / (24.0 * lambda_se * x_max))


def _draw_noise(noise: NoiseClass, rng, n: int) -> np.ndarray:
    if noise.kind == SUB_GAUSSIAN:
        return rng.normal(0.0, noise.parameter, size=n)
    if noise.parameter < 1.0:
        raise ValueError("sub-exponential simulation requires parameter >= 1")
    mean = noise.parameter**2 / 2.0
    return rng.poisson(mean, size=n) - mean


def _draw_matrices(matrix_source: str, d1: int, d2: int, n: int, x_max: float, rng):
    """Returns (rows, cols, None) for elementary sources, (None, None, stack)
    for dense ones. Dense draws are rescaled to operator norm ``x_max``."""
    if matrix_source == "elementary":
        return rng.integers(0, d1, size=n), rng.integers(0, d2, size=n), None
    if matrix_source != "random_bounded":
        raise ValueError(f"matrix_source must be one of {MATRIX_SOURCES}")
    mats = rng.normal(size=(n, d1, d2))
    for k in range(n):
        top = matrix_norm(mats[k], "operator")
        mats[k] *= x_max / top if top > 0 else 0.0
    return None, None, mats


@dataclass(frozen=True)
class MartingaleSample:
    """Per-step trajectory of one simulated run."""

    opnorms: np.ndarray       # ||sum_{i<=k} X_i eps_i||_op
    s_k: np.ndarray           # un-normalized policy statistic
    x_max_seen: float         # largest single-matrix operator norm
    rows: np.ndarray | None = None   # elementary-source indices
    cols: np.ndarray | None = None


def simulate_martingale_sum(d1: int, d2: int, horizon: int, noise: NoiseClass,
                            rng, matrix_source: str = "elementary",
                            x_max: float = 1.0) -> MartingaleSample:
    """Simulate one run and return the full per-step statistics."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    eps = _draw_noise(noise, rng, horizon)
    rows, cols, mats = _draw_matrices(matrix_source, d1, d2, horizon, x_max, rng)
    if mats is None:
        opnorms = np.asarray(kernels.cumulative_opnorm_scan(rows, cols, eps, d1, d2))
        row_counts = np.zeros((d1, horizon), dtype=np.int64)
        col_counts = np.zeros((d2, horizon), dtype=np.int64)
        for k in range(d1):
            row_counts[k] = np.cumsum(rows == k)
        for k in range(d2):
            col_counts[k] = np.cumsum(cols == k)
        s_k = np.maximum(row_counts.max(axis=0), col_counts.max(axis=0)).astype(np.float64)
        return MartingaleSample(opnorms, s_k, 1.0, np.asarray(rows), np.asarray(cols))
    acc = np.zeros((d1, d2))
    gram_left = np.zeros((d1, d1))
    gram_right = np.zeros((d2, d2))
    opnorms = np.empty(horizon)
    s_k = np.empty(horizon)
    seen = 0.0
    for k in range(horizon):
        x = mats[k]
        acc += eps[k] * x
        gram_left += x @ x.T
        gram_right += x.T @ x
        opnorms[k] = kernels.op_norm(acc)
        s_k[k] = max(kernels.op_norm(gram_left), kernels.op_norm(gram_right))
        seen = max(seen, matrix_norm(x, "operator"))
    return MartingaleSample(opnorms, s_k, seen)


def _check_dilation_identity(rows, cols, mats, d1: int, d2: int) -> None:
    """The symmetric embedding must preserve the operator norm exactly; run on
    one trial's matrices as an online self-check of the dilation step."""
    if mats is None:
        sample = np.zeros((d1, d2))
        sample[rows[0], cols[0]] = 1.0
        mats = [sample]
    for x in mats:
        direct = matrix_norm(x, "operator")
        embedded = matrix_norm(dilation(x), "operator")
        if abs(direct - embedded) > 1e-10 * max(1.0, direct):
            raise RuntimeError("dilation operator-norm identity violated")


@dataclass(frozen=True)
class TailValidation:
    """One validated grid point."""

    threshold: float
    budget: float
    trials: int
    violations: int
    theoretical_bound: float

    @property
    def rate(self) -> float:
        return self.violations / self.trials

    @property
    def vacuous(self) -> bool:
        return self.theoretical_bound >= 1.0

    @property
    def slack(self) -> float:
        """Three binomial standard errors at the theoretical bound level."""
        b = min(self.theoretical_bound, 1.0)
        return 3.0 * math.sqrt(b * (1.0 - b) / self.trials)

    @property
    def passed(self) -> bool:
        return self.rate <= min(self.theoretical_bound, 1.0) + self.slack

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "budget": self.budget,
            "trials": self.trials,
            "violations": self.violations,
            "theoretical_bound": self.theoretical_bound,
            "rate": self.rate,
            "vacuous": self.vacuous,
            "passed": self.passed,
        }


def _validate(trials: int, d1: int, d2: int, horizon: int, noise: NoiseClass,
              threshold: float, budget: float, bound: float, rng,
              matrix_source: str, x_max: float) -> TailValidation:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    violations = 0
    for trial in range(trials):
        eps = _draw_noise(noise, rng, horizon)
        rows, cols, mats = _draw_matrices(matrix_source, d1, d2, horizon, x_max, rng)
        if trial == 0:
            _check_dilation_identity(rows, cols, mats, d1, d2)
        if mats is None:
            hit = kernels.martingale_violation_elementary(
                rows, cols, eps, d1, d2, threshold, budget)
        else:
            hit = kernels.martingale_violation_dense(mats, eps, threshold, budget)
        violations += bool(hit)
    return TailValidation(threshold, budget, trials, violations, bound)


def validate_subgaussian_tail(trials: int, d1: int, d2: int, horizon: int,
                              sigma: float, threshold: float, budget: float,
                              rng, matrix_source: str = "elementary",
                              x_max: float = 1.0) -> TailValidation:
    """Empirical violation rate of the sub-Gaussian uniform tail at one
    ``(threshold, budget)`` point."""
    bound = subgaussian_tail_bound(threshold, budget, sigma, d1, d2)
    noise = NoiseClass(SUB_GAUSSIAN, sigma)
    return _validate(trials, d1, d2, horizon, noise, threshold, budget, bound,
                     rng, matrix_source, x_max)


def validate_subexponential_tail(trials: int, d1: int, d2: int, horizon: int,
                                 lambda_se: float, x_max: float, threshold: float,
                                 budget: float, rng,
                                 matrix_source: str = "elementary") -> TailValidation:
    """Empirical violation rate of the sub-Exponential uniform tail at one
    ``(threshold, budget)`` point."""
    bound = subexponential_tail_bound(threshold, budget, lambda_se, x_max, d1, d2)
    noise = NoiseClass(SUB_EXPONENTIAL, lambda_se)
    return _validate(trials, d1, d2, horizon, noise, threshold, budget, bound,
                     rng, matrix_source, x_max)
