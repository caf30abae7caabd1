"""Nuclear-norm penalized, box-constrained maximum likelihood estimation.

The working loss is the averaged negative log-likelihood (base measure
dropped, it does not depend on the parameter):

    Phi_t(Theta) = (1/t) sum_i [ G(Theta[pi_i]) - Theta[pi_i] * y_i ]

and the estimator minimizes ``Phi_t + lambda_t * nuclear_norm`` over the box
``max-norm <= gamma``. The minimizer is computed by projected proximal
gradient: gradient step, singular-value soft-threshold with ``step * lambda``,
box clip. The prox-then-project composition is not the exact prox of the
constrained penalty, so convergence is certified by the fixed-point gap of
that composite map instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .models import ModelSpec, curvature_bounds, link_eval
from .stream import ObservationLog

FAMILY_CODES = {"gaussian": 0, "binomial": 1, "poisson": 2}


class StepSizeUnderflowError(RuntimeError):
    """Backtracking reduced the step below the useful floating range."""


@dataclass(frozen=True)
class SolverConfig:
    """Proximal gradient controls.

    ``step_size`` defaults to ``1 / u_gamma`` (the gradient of the averaged
    loss is ``u_gamma``-Lipschitz entrywise, so this step always descends).
    Termination requires the relative objective change to drop below
    ``rel_tol`` and the iterate displacement below ``10 * rel_tol``, the
    latter being the fixed-point certificate.
    """

    step_size: float | None = None
    max_iters: int = 500
    rel_tol: float = 1e-8
    warm_start: bool = True

    def __post_init__(self):
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")


def aggregate(log: ObservationLog) -> tuple[np.ndarray, np.ndarray]:
    """Per-entry observation counts and response sums, the loss sufficient
    statistics."""
    counts = np.zeros((log.d1, log.d2))
    ysums = np.zeros((log.d1, log.d2))
    rows, cols = log.rows, log.cols
    np.add.at(counts, (rows, cols), 1.0)
    np.add.at(ysums, (rows, cols), log.responses)
    return counts, ysums


def _family_code(model: ModelSpec) -> tuple[int, float]:
    if model.family not in FAMILY_CODES:
        raise ValueError(f"solver does not support the {model.family} family")
    par = {"gaussian": model.sigma, "binomial": model.trials, "poisson": 0.0}[model.family]
    return FAMILY_CODES[model.family], float(par)


def loss(theta, log: ObservationLog, model: ModelSpec) -> float:
    """Averaged negative log-likelihood of ``theta`` on the log."""
    if len(log) == 0:
        raise ValueError("observation log is empty")
    theta = np.asarray(theta, dtype=np.float64)
    counts, ysums = aggregate(log)
    values = counts * link_eval(model, theta, 0) - ysums * theta
    return float(values.sum()) / len(log)


def gradient(theta, log: ObservationLog, model: ModelSpec) -> np.ndarray:
    """Entrywise gradient of :func:`loss`; zero at never-observed entries."""
    if len(log) == 0:
        raise ValueError("observation log is empty")
    theta = np.asarray(theta, dtype=np.float64)
    counts, ysums = aggregate(log)
    return (counts * link_eval(model, theta, 1) - ysums) / len(log)


def bregman(theta, theta_ref, log: ObservationLog, model: ModelSpec) -> float:
    """Bregman divergence of the loss between ``theta`` and ``theta_ref``."""
    theta = np.asarray(theta, dtype=np.float64)
    theta_ref = np.asarray(theta_ref, dtype=np.float64)
    diff = theta - theta_ref
    value = (loss(theta, log, model) - loss(theta_ref, log, model)
             - float(np.sum(gradient(theta_ref, log, model) * diff)))
    return value


def penalized_objective(theta, log: ObservationLog, model: ModelSpec,
                        lambda_t: float) -> float:
    theta = np.asarray(theta, dtype=np.float64)
    nuclear = float(np.sum(kernels.singular_values(theta))) if theta.any() else 0.0
    return loss(theta, log, model) + lambda_t * nuclear


def fit_from_counts(counts, ysums, t_obs: int, lambda_t: float, gamma: float,
                    model: ModelSpec, config: SolverConfig | None = None,
                    init=None) -> np.ndarray:
    """Solve from the sufficient statistics (the online loop's fast path)."""
    if not lambda_t > 0:
        raise ValueError(f"lambda_t must be positive, got {lambda_t}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if t_obs < 1:
        raise ValueError("need at least one observation")
    config = config or SolverConfig()
    counts = np.asarray(counts, dtype=np.float64)
    if init is None:
        init = np.zeros(counts.shape)
    else:
        init = np.asarray(init, dtype=np.float64)
        if np.max(np.abs(init)) > gamma * (1 + 1e-12):
            raise ValueError("init violates the box constraint")
    family, par = _family_code(model)
    step0 = config.step_size
    if step0 is None:
        step0 = 1.0 / curvature_bounds(model)[1]
    try:
        theta, _, _ = kernels.prox_grad_fit(
            counts, np.asarray(ysums, dtype=np.float64), float(t_obs), family,
            par, float(lambda_t), float(gamma), float(step0), config.max_iters,
            config.rel_tol, 10.0 * config.rel_tol, init)
    except RuntimeError as exc:
        if "underflow" in str(exc):
            raise StepSizeUnderflowError(str(exc)) from exc
        raise
    return theta


def fit(log: ObservationLog, lambda_t: float, gamma: float, model: ModelSpec,
        config: SolverConfig | None = None, init=None) -> np.ndarray:
    """Approximate minimizer of the penalized loss over the box.

    The output satisfies the box constraint exactly and its penalized
    objective never exceeds the one at ``init`` (backtracking enforces
    monotone descent).
    """
    if len(log) == 0:
        raise ValueError("observation log is empty")
    counts, ysums = aggregate(log)
    return fit_from_counts(counts, ysums, len(log), lambda_t, gamma, model,
                           config, init)
