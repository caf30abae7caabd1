"""Natural exponential-family observation models.

Each family is described by its log-partition function G on the natural
parameter scale: the response mean is G' and the conditional variance G''.
Supported families and their G:

    gaussian    sigma^2 x^2 / 2         (known scale sigma)
    binomial    N log(1 + e^x)          (N trials)
    poisson     e^x
    exponential -log(-x)                (natural domain x < 0)

The exponential family is supported for evaluation and curvature only; its
natural domain is incompatible with a symmetric parameter box, so entries
live in ``[-gamma, -gamma_lo]`` and the experiment harness excludes it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FAMILIES = ("gaussian", "binomial", "poisson", "exponential")

SUB_GAUSSIAN = "sub_gaussian"
SUB_EXPONENTIAL = "sub_exponential"


@dataclass(frozen=True)
class NoiseClass:
    """Martingale-difference noise class: a variance proxy for the
    sub-Gaussian case, an MGF range/scale parameter for the sub-Exponential
    case (``E exp(s eps) <= exp(s^2 par^2 / 2)`` for ``|s| <= 1/par``)."""

    kind: str
    parameter: float

    def __post_init__(self):
        if self.kind not in (SUB_GAUSSIAN, SUB_EXPONENTIAL):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not self.parameter > 0:
            raise ValueError(f"noise parameter must be positive, got {self.parameter}")


@dataclass(frozen=True)
class ModelSpec:
    """An observation model plus the parameter box it lives on.

    ``gamma`` bounds the magnitude of matrix entries. For the exponential
    family ``gamma_lo`` additionally bounds entries away from the domain
    boundary: entries lie in ``[-gamma, -gamma_lo]`` with 0 < gamma_lo < gamma.
    """

    family: str
    gamma: float
    sigma: float | None = None
    trials: int | None = None
    gamma_lo: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.family == "gaussian":
            if self.sigma is None or not self.sigma > 0:
                raise ValueError("gaussian model requires sigma > 0")
        if self.family == "binomial":
            if self.trials is None or int(self.trials) < 1:
                raise ValueError("binomial model requires trials >= 1")
        if self.family == "exponential":
            if self.gamma_lo is None or not 0 < self.gamma_lo < self.gamma:
                raise ValueError("exponential model requires 0 < gamma_lo < gamma")


def gaussian_model(sigma: float = 1.0, gamma: float = 10.0) -> ModelSpec:
    return ModelSpec("gaussian", gamma=gamma, sigma=sigma)


def binomial_model(trials: int = 1, gamma: float = 1.0) -> ModelSpec:
    return ModelSpec("binomial", gamma=gamma, trials=trials)


def poisson_model(gamma: float = 1.0) -> ModelSpec:
    return ModelSpec("poisson", gamma=gamma)


def exponential_model(gamma_lo: float, gamma: float) -> ModelSpec:
    return ModelSpec("exponential", gamma=gamma, gamma_lo=gamma_lo)


def parameter_interval(model: ModelSpec) -> tuple[float, float]:
    """The interval of admissible natural parameters for matrix entries."""
    if model.family == "exponential":
        return (-model.gamma, -model.gamma_lo)
    return (-model.gamma, model.gamma)


def _check_domain(model: ModelSpec, x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if model.family == "exponential" and np.any(arr >= 0):
        raise ValueError("exponential family natural parameter must be negative")
    return arr


def link_eval(model: ModelSpec, x, order: int = 0):
    """G, G' or G'' of the model's log-partition function at ``x``.

    ``order`` 0/1/2 selects the function, its first or its second derivative.
    Accepts scalars or arrays; raises on values outside the natural domain.
    """
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    arr = _check_domain(model, x)
    scalar = np.isscalar(x) or getattr(x, "ndim", 0) == 0
    if model.family == "gaussian":
        s2 = model.sigma**2
        out = (0.5 * s2 * arr**2, s2 * arr, np.full_like(arr, s2))[order]
    elif model.family == "binomial":
        n = float(model.trials)
        if order == 0:
            out = n * np.logaddexp(0.0, arr)
        else:
            p = 1.0 / (1.0 + np.exp(-arr))
            out = n * p if order == 1 else n * p * (1.0 - p)
    elif model.family == "poisson":
        out = np.exp(arr)
    else:  # exponential
        out = (-np.log(-arr), -1.0 / arr, 1.0 / arr**2)[order]
    return float(out) if scalar else out


def curvature_bounds(model: ModelSpec) -> tuple[float, float]:
    """Min and max of G'' over the model's parameter interval.

    All supported G'' are monotone or unimodal on the interval, so the
    extrema sit at the endpoints (plus the interior peak for binomial).
    """
    lo, hi = parameter_interval(model)
    if model.family == "gaussian":
        s2 = model.sigma**2
        return (s2, s2)
    if model.family == "binomial":
        ends = [link_eval(model, lo, 2), link_eval(model, hi, 2)]
        l_gamma = min(ends)
        u_gamma = link_eval(model, 0.0, 2) if lo < 0 < hi else max(ends)
        return (l_gamma, u_gamma)
    if model.family == "poisson":
        return (math.exp(lo), math.exp(hi))
    # exponential: G'' = 1/x^2 decreases in |x|, extrema at the endpoints
    return (1.0 / (lo * lo), 1.0 / (hi * hi))


def noise_class(model: ModelSpec) -> NoiseClass:
    """Noise class of the centered response ``y - G'(theta)``, valid uniformly
    over the model's parameter interval.

    gaussian: exactly sigma-sub-Gaussian. binomial: the response is bounded
    on an interval of width N, hence (N/2)-sub-Gaussian. poisson: the
    centered MGF satisfies ``exp(mu(e^s - 1 - s)) <= exp(mu s^2)`` for
    |s| <= 1, giving the sub-Exponential parameter ``max(sqrt(2 e^gamma), 1)``.
    exponential: ``2 / gamma_lo`` by the same MGF argument on the rate scale.
    """
    if model.family == "gaussian":
        return NoiseClass(SUB_GAUSSIAN, model.sigma)
    if model.family == "binomial":
        return NoiseClass(SUB_GAUSSIAN, model.trials / 2.0)
    if model.family == "poisson":
        return NoiseClass(SUB_EXPONENTIAL, max(math.sqrt(2.0 * math.exp(model.gamma)), 1.0))
    return NoiseClass(SUB_EXPONENTIAL, 2.0 / model.gamma_lo)


def sample_response(model: ModelSpec, theta_entry, rng, size=None):
    """Draw from the family with natural parameter ``theta_entry``.

    The response mean is ``G'(theta_entry)``; fresh generator state per call
    makes the centered residuals a martingale difference sequence. ``size``
    follows numpy semantics (None draws a scalar).
    """
    theta = _check_domain(model, theta_entry)
    if model.family == "gaussian":
        return rng.normal(link_eval(model, theta, 1), model.sigma, size=size)
    if model.family == "binomial":
        p = 1.0 / (1.0 + np.exp(-theta))
        return rng.binomial(model.trials, p, size=size)
    if model.family == "poisson":
        return rng.poisson(np.exp(theta), size=size)
    return rng.exponential(-1.0 / theta, size=size)
