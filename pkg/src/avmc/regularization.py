"""Online regularization schedules and the good-event diagnostic.

The schedule is the smallest envelope that dominates twice the operator norm
of the score matrix uniformly over time, with a single confidence budget
``alpha``:

    sub-Gaussian:     lambda_t = 8 sigma sqrt(L S_t / t)
    sub-Exponential:  lambda_t = 48 lam (sqrt(S_t L / t) + L / t)

with ``L = log((d1 + d2) / alpha)`` (natural logarithm throughout).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .models import SUB_EXPONENTIAL, SUB_GAUSSIAN, ModelSpec, NoiseClass, link_eval
from .stream import ObservationLog


@dataclass(frozen=True)
class BoundConfig:
    """Confidence budget, problem dimensions, and the noise class."""

    alpha: float
    d1: int
    d2: int
    noise: NoiseClass

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.d1 < 1 or self.d2 < 1:
            raise ValueError("dimensions must be at least 1")

    @property
    def log_term(self) -> float:
        return math.log((self.d1 + self.d2) / self.alpha)


def _check_time_and_variation(s_t: float, t: int) -> None:
    if t < 1:
        raise ValueError(f"t must be at least 1, got {t}")
    if not 0 < s_t <= 1:
        raise ValueError(f"S_t must lie in (0, 1], got {s_t}")


def lambda_subgaussian(cfg: BoundConfig, s_t: float, t: int) -> float:
    if cfg.noise.kind != SUB_GAUSSIAN:
        raise ValueError(f"schedule requires sub-Gaussian noise, got {cfg.noise.kind}")
    _check_time_and_variation(s_t, t)
    return 8.0 * cfg.noise.parameter * math.sqrt(cfg.log_term * s_t / t)


def lambda_subexponential(cfg: BoundConfig, s_t: float, t: int) -> float:
    if cfg.noise.kind != SUB_EXPONENTIAL:
        raise ValueError(f"schedule requires sub-Exponential noise, got {cfg.noise.kind}")
    _check_time_and_variation(s_t, t)
    log_term = cfg.log_term
    return 48.0 * cfg.noise.parameter * (math.sqrt(s_t * log_term / t) + log_term / t)


def lambda_schedule(cfg: BoundConfig, s_t: float, t: int) -> float:
    """Dispatch to the schedule matching the configured noise class."""
    if cfg.noise.kind == SUB_GAUSSIAN:
        return lambda_subgaussian(cfg, s_t, t)
    return lambda_subexponential(cfg, s_t, t)


def score_matrix(theta: np.ndarray, log: ObservationLog, model: ModelSpec) -> np.ndarray:
    """Gradient of the averaged negative log-likelihood at ``theta``:
    mean residual ``G'(theta_entry) - y`` accumulated at the observed entries."""
    if len(log) == 0:
        raise ValueError("observation log is empty")
    theta = np.asarray(theta, dtype=np.float64)
    rows, cols, responses = log.rows, log.cols, log.responses
    residuals = link_eval(model, theta[rows, cols], 1) - responses
    grad = np.zeros(theta.shape)
    np.add.at(grad, (rows, cols), residuals)
    return grad / len(log)


def good_event_holds(theta_star: np.ndarray, log: ObservationLog,
                     model: ModelSpec, lambda_t: float) -> bool:
    """Whether ``lambda_t`` dominates twice the score operator norm at the target."""
    grad = score_matrix(theta_star, log, model)
    return lambda_t >= 2.0 * float(kernels.op_norm(grad))
