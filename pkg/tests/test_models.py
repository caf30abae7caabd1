import math

import numpy as np
import pytest

from avmc.models import (SUB_EXPONENTIAL, SUB_GAUSSIAN, ModelSpec, NoiseClass,
                         binomial_model, curvature_bounds, exponential_model,
                         gaussian_model, link_eval, noise_class,
                         parameter_interval, poisson_model, sample_response)

ALL_MODELS = [
    gaussian_model(sigma=1.0, gamma=10.0),
    gaussian_model(sigma=2.0, gamma=3.0),
    binomial_model(trials=1, gamma=1.0),
    binomial_model(trials=10, gamma=2.0),
    poisson_model(gamma=1.0),
    exponential_model(gamma_lo=0.5, gamma=2.0),
]


class TestSpecValidation:
    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown family"):
            ModelSpec("weibull", gamma=1.0)

    def test_gaussian_needs_sigma(self):
        with pytest.raises(ValueError, match="sigma"):
            ModelSpec("gaussian", gamma=1.0)

    def test_binomial_needs_trials(self):
        with pytest.raises(ValueError, match="trials"):
            ModelSpec("binomial", gamma=1.0)

    def test_exponential_needs_interval(self):
        with pytest.raises(ValueError, match="gamma_lo"):
            ModelSpec("exponential", gamma=1.0)
        with pytest.raises(ValueError, match="gamma_lo"):
            ModelSpec("exponential", gamma=1.0, gamma_lo=2.0)

    def test_noise_class_validation(self):
        with pytest.raises(ValueError):
            NoiseClass("sub_cauchy", 1.0)
        with pytest.raises(ValueError):
            NoiseClass(SUB_GAUSSIAN, 0.0)


class TestLinkEval:
    def test_poisson_at_zero(self):
        model = poisson_model()
        assert link_eval(model, 0.0, 0) == 1.0
        assert link_eval(model, 0.0, 1) == 1.0
        assert link_eval(model, 0.0, 2) == 1.0

    def test_gaussian_table_value(self):
        model = gaussian_model(sigma=2.0, gamma=5.0)
        assert link_eval(model, 3.0, 0) == pytest.approx(18.0, abs=1e-14)
        assert link_eval(model, 3.0, 1) == pytest.approx(12.0, abs=1e-14)
        assert link_eval(model, 3.0, 2) == pytest.approx(4.0, abs=1e-14)

    def test_binomial_at_zero(self):
        model = binomial_model(trials=1)
        assert link_eval(model, 0.0, 0) == pytest.approx(math.log(2.0), abs=1e-15)
        assert link_eval(model, 0.0, 1) == pytest.approx(0.5, abs=1e-15)
        assert link_eval(model, 0.0, 2) == pytest.approx(0.25, abs=1e-15)

    def test_exponential_domain_error(self):
        model = exponential_model(0.5, 2.0)
        with pytest.raises(ValueError, match="negative"):
            link_eval(model, 0.0, 0)
        assert link_eval(model, -1.0, 0) == pytest.approx(0.0, abs=1e-15)
        assert link_eval(model, -2.0, 1) == pytest.approx(0.5, abs=1e-15)

    def test_invalid_order(self):
        with pytest.raises(ValueError, match="order"):
            link_eval(poisson_model(), 0.0, 3)

    def test_vectorized(self):
        model = poisson_model()
        x = np.array([0.0, 1.0])
        assert np.allclose(link_eval(model, x, 1), np.exp(x))

    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.family + str(m.gamma))
    def test_finite_difference_consistency(self, model, rng):
        lo, hi = parameter_interval(model)
        h = 1e-5
        xs = rng.uniform(lo + 2 * h, hi - 2 * h, size=100)
        for order in (1, 2):
            exact = link_eval(model, xs, order)
            approx = (link_eval(model, xs + h, order - 1)
                      - link_eval(model, xs - h, order - 1)) / (2 * h)
            assert np.allclose(exact, approx, rtol=1e-6, atol=1e-9)


class TestCurvatureBounds:
    def test_gaussian_constant(self):
        assert curvature_bounds(gaussian_model(sigma=1.0, gamma=4.0)) == (1.0, 1.0)
        assert curvature_bounds(gaussian_model(sigma=2.0, gamma=4.0)) == (4.0, 4.0)

    def test_poisson_endpoints(self):
        lo, hi = curvature_bounds(poisson_model(gamma=1.0))
        assert lo == pytest.approx(math.exp(-1.0), abs=1e-15)
        assert hi == pytest.approx(math.exp(1.0), abs=1e-15)

    def test_binomial_peak_and_edge(self):
        lo, hi = curvature_bounds(binomial_model(trials=1, gamma=1.0))
        assert lo == pytest.approx(0.19661193324148185, abs=1e-15)
        assert hi == pytest.approx(0.25, abs=1e-15)

    def test_exponential_interval(self):
        lo, hi = curvature_bounds(exponential_model(gamma_lo=0.5, gamma=2.0))
        assert lo == pytest.approx(0.25, abs=1e-15)   # 1/gamma^2
        assert hi == pytest.approx(4.0, abs=1e-15)    # 1/gamma_lo^2

    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.family + str(m.gamma))
    def test_sandwich_exact(self, model, rng):
        lo, hi = parameter_interval(model)
        l_gamma, u_gamma = curvature_bounds(model)
        xs = rng.uniform(lo, hi, size=1000)
        gpp = link_eval(model, xs, 2)
        assert np.all(l_gamma <= gpp)
        assert np.all(gpp <= u_gamma)
        assert 0 < l_gamma <= u_gamma


class TestNoiseClass:
    def test_gaussian(self):
        nc = noise_class(gaussian_model(sigma=1.0))
        assert nc == NoiseClass(SUB_GAUSSIAN, 1.0)

    def test_binomial_half_width(self):
        nc = noise_class(binomial_model(trials=10))
        assert nc == NoiseClass(SUB_GAUSSIAN, 5.0)

    def test_poisson_parameter(self):
        nc = noise_class(poisson_model(gamma=1.0))
        assert nc.kind == SUB_EXPONENTIAL
        assert nc.parameter == pytest.approx(2.3316439815971242, abs=1e-14)

    def test_exponential_parameter(self):
        nc = noise_class(exponential_model(gamma_lo=0.5, gamma=2.0))
        assert nc == NoiseClass(SUB_EXPONENTIAL, 4.0)

    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.family + str(m.gamma))
    def test_mgf_bound_holds_empirically(self, model, rng):
        # empirical MGF of centered residuals never exceeds the class bound
        # plus Monte Carlo slack, on a grid of theta and s
        nc = noise_class(model)
        lo, hi = parameter_interval(model)
        thetas = np.linspace(lo + 1e-9, hi - 1e-9, 5)
        if nc.kind == SUB_GAUSSIAN:
            s_grid = np.array([-1.0, -0.5, -0.25, 0.25, 0.5, 1.0])
        else:
            s_max = 1.0 / nc.parameter
            s_grid = np.array([-1.0, -0.6, -0.3, 0.3, 0.6, 1.0]) * s_max
        n = 300_000
        for theta in thetas:
            y = sample_response(model, theta, rng, size=n)
            eps = y - link_eval(model, theta, 1)
            for s in s_grid:
                z = np.exp(s * eps)
                mean = z.mean()
                slack = 3.0 * z.std(ddof=1) / math.sqrt(n)
                bound = math.exp(0.5 * s * s * nc.parameter**2)
                assert mean <= bound + slack, (model.family, theta, s)


class TestSampleResponse:
    def test_gaussian_mean(self, rng):
        model = gaussian_model(sigma=1.0)
        y = sample_response(model, 0.0, rng, size=1_000_000)
        assert abs(y.mean()) < 0.005

    def test_poisson_mean(self, rng):
        y = sample_response(poisson_model(), 0.0, rng, size=1_000_000)
        assert abs(y.mean() - 1.0) < 0.01
        assert np.all(y >= 0) and np.all(y == np.round(y))

    def test_binomial_mean(self, rng):
        y = sample_response(binomial_model(trials=5), 0.0, rng, size=1_000_000)
        assert abs(y.mean() - 2.5) < 0.01

    def test_binomial_support(self, rng):
        y = sample_response(binomial_model(trials=1), 0.0, rng, size=1000)
        assert set(np.unique(y)) <= {0, 1}

    def test_exponential_domain_error(self, rng):
        with pytest.raises(ValueError, match="negative"):
            sample_response(exponential_model(0.5, 2.0), 0.5, rng)

    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.family + str(m.gamma))
    def test_mean_matches_link(self, model, rng):
        lo, hi = parameter_interval(model)
        n = 1_000_000
        for theta in rng.uniform(lo + 1e-9, hi - 1e-9, size=10):
            y = sample_response(model, theta, rng, size=n)
            se = y.std(ddof=1) / math.sqrt(n)
            assert abs(y.mean() - link_eval(model, theta, 1)) <= 4 * se + 1e-12
