import numpy as np
import pytest

from avmc.models import gaussian_model, link_eval, poisson_model
from avmc.stream import (ObservationLog, TargetMatrix, generate_target,
                         next_index, observe, simulate_stream)

# chi-square inverse CDF at 0.999 with 24 degrees of freedom
CHI2_CRIT_24_999 = 51.17859777737739


class TestGenerateTarget:
    def test_rank_one_rows_identical(self, rng):
        target = generate_target(5, 5, 1, 1.0, rng)
        assert np.all(target.theta_star == target.theta_star[0])
        s = np.linalg.svd(target.theta_star, compute_uv=False)
        assert s[1] <= 1e-10 * s[0]

    def test_rank_bound_and_entry_range(self, rng):
        target = generate_target(10, 10, 2, 1.0, rng)
        s = np.linalg.svd(target.theta_star, compute_uv=False)
        assert s[2] <= 1e-10 * s[0]
        assert np.all((0 <= target.theta_star) & (target.theta_star <= 1.0))

    def test_scale_ten(self, rng):
        target = generate_target(5, 5, 1, 10.0, rng)
        assert np.all((0 <= target.theta_star) & (target.theta_star <= 10.0))
        assert target.gamma == 10.0

    def test_rank_too_large(self, rng):
        with pytest.raises(ValueError, match="rank"):
            generate_target(3, 3, 4, 1.0, rng)

    def test_target_invariants_enforced(self):
        with pytest.raises(ValueError, match="max-norm"):
            TargetMatrix(np.full((2, 2), 3.0), 1, 1.0)
        with pytest.raises(ValueError, match="rank"):
            TargetMatrix(np.diag([3.0, 1.0]), 1, 5.0)


class TestNextIndex:
    def test_singleton(self, rng):
        assert next_index(1, 1, rng) == (0, 0)

    def test_uniform_frequencies(self, rng):
        n = 1_000_000
        counts = np.zeros(25, dtype=np.int64)
        for _ in range(n):
            r, c = next_index(5, 5, rng)
            counts[r * 5 + c] += 1
        freqs = counts / n
        assert np.all(np.abs(freqs - 0.04) < 0.002)

    def test_chi_square_uniformity(self, rng):
        n = 100_000
        counts = np.zeros(25, dtype=np.int64)
        for _ in range(n):
            r, c = next_index(5, 5, rng)
            counts[r * 5 + c] += 1
        expected = n / 25
        statistic = float(np.sum((counts - expected) ** 2 / expected))
        assert statistic < CHI2_CRIT_24_999


class TestObserve:
    def _zero_target(self):
        return TargetMatrix(np.zeros((2, 2)), 1, 1.0)

    def test_gaussian_lln(self, rng):
        target = self._zero_target()
        model = gaussian_model(sigma=1.0, gamma=1.0)
        values = np.array([observe(target, (0, 0), model, rng) for _ in range(100_000)])
        se = values.std(ddof=1) / np.sqrt(values.size)
        assert abs(values.mean()) <= 4 * se

    def test_poisson_support_and_mean(self, rng):
        target = self._zero_target()
        model = poisson_model(gamma=1.0)
        values = np.array([observe(target, (1, 1), model, rng) for _ in range(100_000)])
        assert np.all(values >= 0)
        se = values.std(ddof=1) / np.sqrt(values.size)
        assert abs(values.mean() - link_eval(model, 0.0, 1)) <= 4 * se

    def test_index_out_of_range(self, rng):
        with pytest.raises(ValueError, match="out of range"):
            observe(self._zero_target(), (2, 0), gaussian_model(1.0, 1.0), rng)


class TestObservationLog:
    def test_append_and_arrays(self):
        log = ObservationLog(2, 3)
        log.append((0, 2), 1.5)
        log.append((1, 0), -0.5)
        assert len(log) == 2
        assert log.rows.tolist() == [0, 1]
        assert log.cols.tolist() == [2, 0]
        assert log.responses.tolist() == [1.5, -0.5]

    def test_append_range_check(self):
        log = ObservationLog(2, 2)
        with pytest.raises(ValueError):
            log.append((2, 0), 0.0)

    def test_from_arrays_validates(self):
        with pytest.raises(ValueError, match="equal length"):
            ObservationLog.from_arrays(2, 2, [0], [0, 1], [0.0, 1.0])
        with pytest.raises(ValueError, match="out of range"):
            ObservationLog.from_arrays(2, 2, [5], [0], [0.0])

    def test_csv_roundtrip(self, rng, tmp_path):
        target = generate_target(3, 3, 1, 1.0, rng)
        log = simulate_stream(target, gaussian_model(1.0, 1.0), 50, rng)
        path = tmp_path / "log.csv"
        log.to_csv(path)
        back = ObservationLog.from_csv(path, 3, 3)
        assert np.array_equal(back.rows, log.rows)
        assert np.array_equal(back.cols, log.cols)
        assert np.array_equal(back.responses, log.responses)  # repr round-trips exactly

    def test_replay_determinism(self):
        rng_a = np.random.default_rng(77)
        rng_b = np.random.default_rng(77)
        target_a = generate_target(4, 4, 2, 1.0, rng_a)
        target_b = generate_target(4, 4, 2, 1.0, rng_b)
        model = poisson_model(1.0)
        log_a = simulate_stream(target_a, model, 200, rng_a)
        log_b = simulate_stream(target_b, model, 200, rng_b)
        assert np.array_equal(target_a.theta_star, target_b.theta_star)
        assert np.array_equal(log_a.rows, log_b.rows)
        assert np.array_equal(log_a.responses, log_b.responses)
