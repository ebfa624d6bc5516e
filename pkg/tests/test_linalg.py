import numpy as np
import numpy.testing as npt
import pytest

from mteq import SingularSystemError, is_z_matrix, lu_solve, m_matrix_certificate

from conftest import stream


class TestLuSolve:
    def test_identity(self):
        npt.assert_array_equal(lu_solve(np.eye(2), np.array([3.0, -1.0])), [3.0, -1.0])

    def test_small_spd_system(self):
        M = np.array([[2.0, -1.0], [-1.0, 2.0]])
        d = lu_solve(M, np.array([1.0, 1.0]))
        npt.assert_allclose(d, [1.0, 1.0], rtol=1e-14)
        assert np.linalg.norm(M @ d - [1.0, 1.0]) <= 1e-12

    def test_rank_deficient_raises(self):
        with pytest.raises(SingularSystemError):
            lu_solve(np.ones((2, 2)), np.ones(2))

    def test_zero_matrix_raises(self):
        with pytest.raises(SingularSystemError):
            lu_solve(np.zeros((3, 3)), np.ones(3))

    def test_shape_checks(self):
        with pytest.raises(ValueError):
            lu_solve(np.ones((2, 3)), np.ones(2))
        with pytest.raises(ValueError):
            lu_solve(np.eye(2), np.ones(3))

    def test_residuals_on_random_well_conditioned_systems(self):
        # Diagonally shifted random matrices, sizes up to 500.
        worst = 0.0
        for i in range(1000):
            rng = stream(5000 + i)
            n = int(rng.integers(200, 501)) if i % 100 == 0 else int(rng.integers(1, 61))
            M = rng.standard_normal((n, n)) + n * np.eye(n)
            rhs = rng.standard_normal(n)
            d = lu_solve(M, rhs)
            worst = max(worst, np.linalg.norm(M @ d - rhs) / (1 + np.linalg.norm(rhs)))
        assert worst <= 1e-10


class TestIsZMatrix:
    def test_examples(self):
        assert is_z_matrix(np.array([[2.0, -1.0], [-1.0, 2.0]]))
        assert not is_z_matrix(np.array([[2.0, 0.1], [-1.0, 2.0]]))
        assert is_z_matrix(np.eye(3))

    def test_diagonal_sign_is_irrelevant(self):
        assert is_z_matrix(np.diag([-5.0, 2.0]))

    def test_exact_sign_boundary(self):
        assert is_z_matrix(np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert not is_z_matrix(np.array([[1.0, 1e-300], [0.0, 1.0]]))


class TestMMatrixCertificate:
    def test_certified(self):
        M = np.array([[2.0, -1.0], [-1.0, 2.0]])
        assert m_matrix_certificate(M, np.ones(2))

    def test_not_certified(self):
        M = np.array([[0.0, -1.0], [-1.0, 0.0]])
        assert not m_matrix_certificate(M, np.ones(2))

    def test_diagonal(self):
        assert m_matrix_certificate(np.eye(2), np.ones(2))

    def test_z_pattern_required(self):
        assert not m_matrix_certificate(np.array([[1.0, 0.5], [0.0, 1.0]]), np.ones(2))

    def test_witness_must_be_positive(self):
        with pytest.raises(ValueError):
            m_matrix_certificate(np.eye(2), np.array([1.0, 0.0]))
