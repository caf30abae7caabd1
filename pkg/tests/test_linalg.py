import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from avmc.linalg import (SVDError, as_matrix, box_project, dilation,
                         matrix_norm, singular_value_soft_threshold, svd)


def eigh_singular_values(m):
    """Independent oracle: singular values via the eigen-decomposition of M^T M."""
    m = np.asarray(m, dtype=np.float64)
    eigs = np.linalg.eigvalsh(m.T @ m)
    return np.sqrt(np.clip(eigs, 0.0, None))[::-1]


def matrices(max_dim=8, scale=10.0):
    dims = st.integers(1, max_dim)
    return dims.flatmap(lambda d1: dims.flatmap(lambda d2: arrays(
        np.float64, (d1, d2),
        elements=st.floats(-scale, scale, allow_nan=False, width=64))))


class TestValidation:
    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="non-finite"):
            as_matrix([[1.0, np.nan]])

    def test_rejects_1d(self):
        with pytest.raises(ValueError, match="2-dimensional"):
            as_matrix([1.0, 2.0])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            as_matrix(np.zeros((0, 3)))


class TestMatrixNorm:
    def test_identity_frobenius(self):
        assert matrix_norm(np.eye(2), "frobenius") == pytest.approx(np.sqrt(2), abs=1e-12)

    def test_diagonal_norms(self):
        m = np.diag([3.0, 1.0])
        assert matrix_norm(m, "nuclear") == pytest.approx(4.0, abs=1e-12)
        assert matrix_norm(m, "operator") == pytest.approx(3.0, abs=1e-12)
        assert matrix_norm(m, "max") == pytest.approx(3.0, abs=1e-12)

    def test_zero_matrix_all_kinds(self):
        z = np.zeros((3, 4))
        for kind in ("frobenius", "nuclear", "operator", "max"):
            assert matrix_norm(z, kind) == 0.0

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown norm kind"):
            matrix_norm(np.eye(2), "spectral")

    def test_against_eigh_oracle(self, rng):
        m = rng.normal(size=(4, 3))
        s = eigh_singular_values(m)
        assert matrix_norm(m, "nuclear") == pytest.approx(s.sum(), rel=1e-10)
        assert matrix_norm(m, "operator") == pytest.approx(s[0], rel=1e-10)
        rank = np.sum(s > 1e-12 * s[0])
        assert matrix_norm(m, "nuclear") >= matrix_norm(m, "operator") - 1e-12
        assert matrix_norm(m, "operator") >= matrix_norm(m, "frobenius") / np.sqrt(rank) - 1e-12

    @settings(max_examples=60, deadline=None)
    @given(matrices())
    def test_norm_inequalities(self, m):
        nuclear = matrix_norm(m, "nuclear")
        operator = matrix_norm(m, "operator")
        frob = matrix_norm(m, "frobenius")
        mx = matrix_norm(m, "max")
        slack = 1e-9 * (1.0 + frob)
        assert nuclear >= operator - slack
        assert frob**2 <= nuclear * operator + slack
        assert mx <= operator + slack


class TestSVD:
    def test_diagonal(self):
        _, s, _ = svd(np.diag([3.0, 1.0]))
        assert np.allclose(s, [3.0, 1.0], atol=1e-12)

    def test_zero(self):
        u, s, v = svd(np.zeros((3, 3)))
        assert np.allclose(s, 0.0)
        assert np.allclose(u.T @ u, np.eye(3), atol=1e-10)
        assert np.allclose(v.T @ v, np.eye(3), atol=1e-10)

    def test_reconstruction_5x5(self, rng):
        m = rng.normal(size=(5, 5))
        u, s, v = svd(m)
        rel = np.linalg.norm((u * s) @ v.T - m) / np.linalg.norm(m)
        assert rel <= 1e-10

    @pytest.mark.parametrize("shape", [(2, 2), (7, 4), (4, 7), (20, 20), (1, 6)])
    def test_roundtrip_and_orthonormality(self, shape, rng):
        m = rng.normal(size=shape)
        u, s, v = svd(m)
        assert np.all(np.diff(s) <= 1e-12)
        assert np.linalg.norm((u * s) @ v.T - m) <= 1e-10 * np.linalg.norm(m)
        k = min(shape)
        assert np.linalg.norm(u.T @ u - np.eye(k)) <= 1e-10
        assert np.linalg.norm(v.T @ v - np.eye(k)) <= 1e-10

    def test_rank_deficient(self, rng):
        base = rng.normal(size=(6, 2))
        m = base @ base.T  # rank 2, 6x6
        u, s, v = svd(m)
        assert np.linalg.norm((u * s) @ v.T - m) <= 1e-10 * np.linalg.norm(m)
        assert np.linalg.norm(u.T @ u - np.eye(6)) <= 1e-10


class TestSoftThreshold:
    def test_diagonal_shrinkage(self):
        out = singular_value_soft_threshold(np.diag([3.0, 1.0]), 1.0)
        assert np.allclose(np.abs(out), np.diag([2.0, 0.0]), atol=1e-10)

    def test_tau_zero_identity(self, rng):
        m = rng.normal(size=(4, 5))
        out = singular_value_soft_threshold(m, 0.0)
        assert np.linalg.norm(out - m) <= 1e-10 * np.linalg.norm(m)

    def test_negative_tau_rejected(self):
        with pytest.raises(ValueError):
            singular_value_soft_threshold(np.eye(2), -0.5)

    def test_nuclear_norm_shrinks(self, rng):
        m = rng.normal(size=(5, 5))
        out = singular_value_soft_threshold(m, 0.7)
        assert matrix_norm(out, "nuclear") <= matrix_norm(m, "nuclear") + 1e-12

    def test_perturbation_oracle(self, rng):
        # prox objective: the output must beat random nearby candidates
        m = rng.normal(size=(4, 4))
        tau = 0.5
        out = singular_value_soft_threshold(m, tau)

        def objective(x):
            return 0.5 * np.linalg.norm(x - m) ** 2 + tau * eigh_singular_values(x).sum()

        base = objective(out)
        for _ in range(300):
            delta = rng.normal(size=(4, 4))
            delta *= rng.uniform(0, 0.1) / np.linalg.norm(delta)
            assert objective(out + delta) >= base - 1e-12

    @settings(max_examples=40, deadline=None)
    @given(matrices(max_dim=5), matrices(max_dim=5), st.floats(0.0, 3.0))
    def test_nonexpansive(self, a, b, tau):
        if a.shape != b.shape:
            return
        lhs = np.linalg.norm(singular_value_soft_threshold(a, tau)
                             - singular_value_soft_threshold(b, tau))
        assert lhs <= np.linalg.norm(a - b) + 1e-9


class TestBoxProject:
    def test_clips_large_entry(self):
        assert box_project(np.array([[5.0]]), 2.0)[0, 0] == 2.0

    def test_identity_inside_box(self, rng):
        m = rng.uniform(-1, 1, size=(3, 3))
        assert np.array_equal(box_project(m, 1.0), m)

    def test_per_entry(self):
        out = box_project(np.array([[-3.0, 0.5]]), 1.0)
        assert np.array_equal(out, np.array([[-1.0, 0.5]]))

    def test_gamma_positive(self):
        with pytest.raises(ValueError):
            box_project(np.eye(2), 0.0)


class TestDilation:
    def test_1x1(self):
        z = dilation(np.array([[2.0]]))
        assert np.array_equal(z, np.array([[0.0, 2.0], [2.0, 0.0]]))
        assert matrix_norm(z, "operator") == pytest.approx(2.0, abs=1e-12)

    def test_zero(self):
        assert not dilation(np.zeros((2, 3))).any()

    def test_symmetric_and_norm_preserving(self, rng):
        x = rng.normal(size=(3, 2))
        z = dilation(x)
        assert np.array_equal(z, z.T)
        assert abs(matrix_norm(z, "operator") - matrix_norm(x, "operator")) <= 1e-10

    @settings(max_examples=50, deadline=None)
    @given(matrices(max_dim=6))
    def test_norm_identity_property(self, x):
        gap = abs(matrix_norm(dilation(x), "operator") - matrix_norm(x, "operator"))
        assert gap <= 1e-10 * (1.0 + matrix_norm(x, "operator"))


def test_svd_error_is_runtime_error():
    assert issubclass(SVDError, RuntimeError)
