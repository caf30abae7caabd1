"""The always-valid risk-bound process and its fixed-checkpoint comparator.

Both noise classes share the structure ``6 sqrt(r) lambda_t / (pbar_t l_gamma)``
with their respective regularization schedules, which expands to

    sub-Gaussian:     48 sigma sqrt(r) / (pbar l) * sqrt(S_t L / t)
    sub-Exponential: 288 lam   sqrt(r) / (pbar l) * (sqrt(S_t L / t) + L / t)

where ``L = log((d1 + d2) / alpha)``. The bound is infinite exactly while some
entry is unobserved (``pbar_t = 0``).

The checkpoint comparator replays the same argument at a fixed time with the
budget split as ``alpha / f`` over ``f`` evenly spaced checkpoints. With the
identical matrix-MGF bound the fixed-time optimization gives the tail
``exp(-u^2 / (8 sqrt(2) sigma^2 w))``, hence the schedule constant
``sqrt(32 sqrt(2)) approx 6.73`` in place of the rounded anytime constant 8;
the sub-Exponential exponents coincide with the anytime ones, so only the
budget split changes there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import SUB_GAUSSIAN
from .regularization import BoundConfig

FIXED_TIME_SUBGAUSSIAN_FACTOR = math.sqrt(32.0 * math.sqrt(2.0))


def _check_common(r: int, pbar_t: float, l_gamma: float, s_t: float, t: int) -> None:
    if t < 1:
        raise ValueError(f"t must be at least 1, got {t}")
    if r < 1:
        raise ValueError(f"rank bound must be at least 1, got {r}")
    if pbar_t < 0:
        raise ValueError(f"pbar_t must be nonnegative, got {pbar_t}")
    if not l_gamma > 0:
        raise ValueError(f"l_gamma must be positive, got {l_gamma}")
    if not 0 < s_t <= 1:
        raise ValueError(f"S_t must lie in (0, 1], got {s_t}")


def risk_bound_subgaussian(sigma: float, r: int, pbar_t: float, l_gamma: float,
                           s_t: float, d1: int, d2: int, alpha: float, t: int) -> float:
    """Always-valid Frobenius risk bound, sub-Gaussian noise. ``inf`` when
    ``pbar_t`` is zero."""
    _check_common(r, pbar_t, l_gamma, s_t, t)
    if pbar_t == 0:
        return math.inf
    log_term = math.log((d1 + d2) / alpha)
    return (48.0 * sigma * math.sqrt(r) / (pbar_t * l_gamma)
            * math.sqrt(s_t * log_term / t))


def risk_bound_subexponential(lambda_se: float, r: int, pbar_t: float, l_gamma: float,
                              s_t: float, d1: int, d2: int, alpha: float, t: int) -> float:
    """Always-valid Frobenius risk bound, sub-Exponential noise."""
    _check_common(r, pbar_t, l_gamma, s_t, t)
    if pbar_t == 0:
        return math.inf
    log_term = math.log((d1 + d2) / alpha)
    return (288.0 * lambda_se * math.sqrt(r) / (pbar_t * l_gamma)
            * (math.sqrt(s_t * log_term / t) + log_term / t))


def risk_bound(cfg: BoundConfig, r: int, pbar_t: float, l_gamma: float,
               s_t: float, t: int) -> float:
    """Dispatch on the configured noise class."""
    if cfg.noise.kind == SUB_GAUSSIAN:
        return risk_bound_subgaussian(cfg.noise.parameter, r, pbar_t, l_gamma,
                                      s_t, cfg.d1, cfg.d2, cfg.alpha, t)
    return risk_bound_subexponential(cfg.noise.parameter, r, pbar_t, l_gamma,
                                     s_t, cfg.d1, cfg.d2, cfg.alpha, t)


def corollary_bound(sigma: float, r: int, mu: float, nu: float, l_gamma: float,
                    u_gamma: float, d1: int, d2: int, alpha: float, t: int) -> float:
    """Closed-form bound under near-uniform sampling: entry frequencies at
    least ``1 / (mu d1 d2)`` and marginals at most ``nu / min(d1, d2)``."""
    if t < 1:
        raise ValueError(f"t must be at least 1, got {t}")
    if mu < 1 or nu < 1:
        raise ValueError("mu and nu must be at least 1")
    log_term = math.log((d1 + d2) / alpha)
    return (48.0 * d1 * d2 * mu * sigma * math.sqrt(r) / l_gamma
            * math.sqrt(nu * u_gamma**2 * log_term / (min(d1, d2) * t)))


def checkpoint_times(horizon: int, f: int) -> np.ndarray:
    """``f`` evenly spaced checkpoint times over ``[1, horizon]``."""
    if f < 1:
        raise ValueError(f"checkpoint count must be at least 1, got {f}")
    if f > horizon:
        raise ValueError(f"checkpoint count {f} exceeds the horizon {horizon}")
    times = np.unique(np.round(np.arange(1, f + 1) * horizon / f).astype(np.int64))
    return np.maximum(times, 1)


def hoeffding_checkpoint_bound(cfg: BoundConfig, f: int, t: int, horizon: int,
                               r: int, pbar_t: float, l_gamma: float,
                               s_t: float) -> float:
    """Fixed-time comparator at one of ``f`` pre-specified checkpoints.

    Same structural formula as the always-valid bound with the per-checkpoint
    budget ``alpha / f``; only the concentration step differs (fixed-time
    Markov instead of the uniform-in-time argument). Strictly increasing in
    ``f`` at a fixed checkpoint; defined only on the checkpoint grid.
    """
    if t not in checkpoint_times(horizon, f):
        raise ValueError(f"t={t} is not one of the {f} checkpoints over horizon {horizon}")
    _check_common(r, pbar_t, l_gamma, s_t, t)
    if pbar_t == 0:
        return math.inf
    log_term = math.log((cfg.d1 + cfg.d2) * f / cfg.alpha)
    if cfg.noise.kind == SUB_GAUSSIAN:
        lam_fixed = (FIXED_TIME_SUBGAUSSIAN_FACTOR * cfg.noise.parameter
                     * math.sqrt(s_t * log_term / t))
    else:
        lam_fixed = 48.0 * cfg.noise.parameter * (math.sqrt(s_t * log_term / t)
                                                  + log_term / t)
    return 6.0 * math.sqrt(r) * lam_fixed / (pbar_t * l_gamma)


@dataclass
class RiskBoundTrace:
    """Per-step bound process records. ``bound`` is ``inf`` exactly where
    ``pbar`` is zero."""

    t: np.ndarray
    lambda_t: np.ndarray
    s_t: np.ndarray
    pbar_t: np.ndarray
    bound: np.ndarray

    def __post_init__(self):
        lengths = {len(self.t), len(self.lambda_t), len(self.s_t),
                   len(self.pbar_t), len(self.bound)}
        if len(lengths) != 1:
            raise ValueError("trace arrays must have equal length")
        infinite = ~np.isfinite(np.asarray(self.bound, dtype=np.float64))
        unseen = np.asarray(self.pbar_t, dtype=np.float64) == 0
        if not np.array_equal(infinite, unseen):
            raise ValueError("bound must be infinite exactly where pbar_t is zero")

    def __len__(self) -> int:
        return len(self.t)


def coverage_check(error_trace, bound_trace) -> bool:
    """True when the error stays strictly below the bound at every step.

    A step with ``error == bound`` counts as a violation; infinite bounds
    cover everything. ``bound_trace`` may be a :class:`RiskBoundTrace` or a
    plain array of bounds.
    """
    bounds = bound_trace.bound if isinstance(bound_trace, RiskBoundTrace) else bound_trace
    errors = np.asarray(error_trace, dtype=np.float64)
    bounds = np.asarray(bounds, dtype=np.float64)
    if errors.shape != bounds.shape:
        raise ValueError(f"length mismatch: {errors.shape} vs {bounds.shape}")
    return bool(np.all(errors < bounds))
