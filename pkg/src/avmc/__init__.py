"""Online low-rank matrix completion with always-valid (anytime) risk bounds.

The pieces, bottom up: small-matrix primitives (:mod:`avmc.linalg`),
exponential-family observation models (:mod:`avmc.models`), data generation
(:mod:`avmc.stream`), streaming policy statistics (:mod:`avmc.stats`), online
regularization schedules (:mod:`avmc.regularization`), the penalized solver
(:mod:`avmc.solver`), the risk-bound process (:mod:`avmc.bounds`), Monte Carlo
tail validators (:mod:`avmc.concentration`) and the experiment harness with
its CLI (:mod:`avmc.harness`, ``avmc run`` / ``avmc validate``).

Hot kernels run on a compiled extension when available; set
``AVMC_BACKEND=python`` to force the pure-numpy fallback.
"""

from ._backend import BACKEND as backend_name
from .bounds import (RiskBoundTrace, corollary_bound, coverage_check,
                     hoeffding_checkpoint_bound, risk_bound,
                     risk_bound_subexponential, risk_bound_subgaussian)
from .harness import (ExperimentConfig, ValidationConfig, run_experiment,
                      run_validation)
from .linalg import (box_project, dilation, matrix_norm,
                     singular_value_soft_threshold, svd)
from .models import (ModelSpec, NoiseClass, binomial_model, curvature_bounds,
                     exponential_model, gaussian_model, link_eval, noise_class,
                     poisson_model, sample_response)
from .regularization import (BoundConfig, good_event_holds, lambda_schedule,
                             lambda_subexponential, lambda_subgaussian)
from .solver import SolverConfig, bregman, fit, gradient, loss
from .stats import SummaryStats, min_frequency, policy_variation, update
from .stream import ObservationLog, TargetMatrix, generate_target, next_index, observe

__version__ = "0.1.0"

__all__ = [
    "BoundConfig",
    "ExperimentConfig",
    "ModelSpec",
    "NoiseClass",
    "ObservationLog",
    "RiskBoundTrace",
    "SolverConfig",
    "SummaryStats",
    "TargetMatrix",
    "ValidationConfig",
    "backend_name",
    "binomial_model",
    "box_project",
    "bregman",
    "corollary_bound",
    "coverage_check",
    "curvature_bounds",
    "dilation",
    "exponential_model",
    "fit",
    "gaussian_model",
    "generate_target",
    "good_event_holds",
    "gradient",
    "hoeffding_checkpoint_bound",
    "lambda_schedule",
    "lambda_subexponential",
    "lambda_subgaussian",
    "link_eval",
    "loss",
    "matrix_norm",
    "min_frequency",
    "next_index",
    "noise_class",
    "observe",
    "poisson_model",
    "policy_variation",
    "risk_bound",
    "risk_bound_subexponential",
    "risk_bound_subgaussian",
    "run_experiment",
    "run_validation",
    "sample_response",
    "singular_value_soft_threshold",
    "svd",
    "update",
]
