import numpy as np
import numpy.testing as npt
import pytest

from mteq import (
    B_INVALID,
    B_POSITIVE,
    B_WITH_ZEROS,
    DenseTensor,
    component_root,
    embed_solution,
    identity_tensor,
    load_equation,
    m_matrix_certificate,
    make_equation,
    max_feasible_step,
    newton_matrix,
    reduce_zero_pattern,
    regularized_jacobian,
    regularized_residual,
    residual,
    residual_y,
    residual_y_jacobian,
    save_equation,
    scaled_residual,
    scaled_residual_jacobian,
    semi_symmetrize,
    gen_reducible,
    solve_regularized_newton,
)

from conftest import central_fd, stream, subset_zero_oracle


def identity_eq(b):
    return make_equation(identity_tensor(3, len(b)), np.asarray(b, dtype=float))


def random_eq(m, n, seed_stream, positive_b=True):
    rng = stream(seed_stream)
    A = semi_symmetrize(DenseTensor(rng.random((n,) * m)))
    s = 1.01 * float((A.array.reshape(n, -1).sum(axis=1)).max())
    arr = s * identity_tensor(m, n).array - A.array
    b = rng.random(n) if positive_b else np.abs(rng.random(n))
    return make_equation(DenseTensor(arr, "semi-symmetric"), b)


class TestMakeEquation:
    def test_scaling_factor(self):
        arr = np.zeros((2, 2, 2))
        arr[0, 0, 0] = 5.0
        eq = make_equation(DenseTensor(arr), np.array([2.0, 1.0]))
        assert eq.omega == 5.0
        assert eq.tensor.array[0, 0, 0] == 1.0
        npt.assert_array_equal(eq.b, [0.4, 0.2])
        assert max(np.abs(eq.tensor.array).max(), np.abs(eq.b).max()) == 1.0

    def test_b_classes(self):
        assert identity_eq([1.0, 2.0]).b_class == B_POSITIVE
        eq = make_equation(identity_tensor(3, 3), np.array([1.0, 0.0, 2.0]))
        assert eq.b_class == B_WITH_ZEROS
        assert identity_eq([1.0, -1.0]).b_class == B_INVALID

    def test_symmetrize_flag(self):
        arr = np.zeros((2, 2, 2))
        arr[0, 0, 1] = 2.0
        eq = make_equation(DenseTensor(arr), np.ones(2), symmetrize=True)
        assert eq.tensor.symmetry == "semi-symmetric"
        # omega is taken after symmetrization: max entry is then 1.0
        assert eq.omega == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            make_equation(identity_tensor(3, 2), np.ones(3))


class TestComponentRoot:
    def test_matches_power(self):
        y = np.array([4.0, 9.0, 2.5])
        npt.assert_allclose(component_root(y, 2), np.sqrt(y), rtol=1e-15)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            component_root(np.array([1.0, 0.0]), 2)
        with pytest.raises(ValueError):
            component_root(np.array([1.0, -2.0]), 2)

    def test_rejects_subnormal_range(self):
        with pytest.raises(ValueError):
            component_root(np.array([1.0, 1e-310]), 2)


class TestResidualMaps:
    def test_residual_at_solution(self):
        eq = identity_eq([4.0, 9.0])
        npt.assert_allclose(residual(eq, np.array([2.0, 3.0])), [0.0, 0.0], atol=1e-15)

    def test_residual_direct_value(self):
        eq = identity_eq([4.0, 9.0])
        # scaled by omega = 9
        npt.assert_allclose(residual(eq, np.array([1.0, 1.0])), np.array([-3.0, -8.0]) / 9.0,
                            rtol=1e-15)

    def test_residual_y_identity_tensor(self):
        # scaled data: omega = 9, so residual_y(y) = y/9 - b/9, zero at y = (4, 9)
        eq = identity_eq([4.0, 9.0])
        npt.assert_allclose(residual_y(eq, np.array([4.0, 9.0])), [0.0, 0.0], atol=1e-15)
        npt.assert_allclose(residual_y(eq, np.array([1.0, 1.0])),
                            (np.array([1.0, 1.0]) - np.array([4.0, 9.0])) / 9.0, rtol=1e-14)

    def test_residual_y_equals_residual_after_root(self):
        eq = random_eq(4, 5, 21)
        for j in range(10):
            y = stream(210 + j).random(5) + 0.1
            x = component_root(y, eq.order - 1)
            npt.assert_allclose(residual_y(eq, y), residual(eq, x), rtol=1e-13, atol=1e-15)

    def test_domain_guard(self):
        eq = identity_eq([1.0, 1.0])
        with pytest.raises(ValueError):
            residual_y(eq, np.array([1.0, 0.0]))

    def test_scaled_residual_value(self):
        # omega = 1 keeps the tensor unscaled: value is (y - b) / y componentwise
        eq = identity_eq([0.5, 0.5])
        y = np.array([0.25, 1.0])
        npt.assert_allclose(scaled_residual(eq, y), [-1.0, 0.5], rtol=1e-14)

    def test_scaled_residual_zero_at_solution(self):
        eq = identity_eq([4.0, 9.0])
        npt.assert_allclose(scaled_residual(eq, np.array([4.0, 9.0])), [0.0, 0.0], atol=1e-14)


class TestJacobians:
    def test_identity_tensor_jacobian_is_identity(self):
        eq = identity_eq([0.4, 0.9])  # omega = 1
        for y in (np.array([1.0, 1.0]), np.array([0.3, 2.5])):
            npt.assert_allclose(residual_y_jacobian(eq, y), np.eye(2), rtol=1e-14, atol=1e-15)

    def test_finite_difference_match(self):
        eq = random_eq(4, 5, 22)
        for j in range(5):
            y = stream(220 + j).random(5) + 0.3
            J = residual_y_jacobian(eq, y)
            Jfd = central_fd(lambda v: residual_y(eq, v), y)
            npt.assert_allclose(J, Jfd, rtol=1e-6, atol=1e-8)

    def test_jacobian_times_y_identity(self):
        for (m, n, s) in [(3, 10, 23), (4, 10, 24), (5, 5, 25)]:
            eq = random_eq(m, n, s)
            for j in range(20):
                y = stream(1000 * m + j).random(n) + 0.1
                lhs = residual_y_jacobian(eq, y) @ y
                rhs = residual_y(eq, y) + eq.b
                npt.assert_allclose(lhs, rhs, rtol=0,
                                    atol=1e-12 * (1 + np.linalg.norm(eq.b)))

    def test_scaled_jacobian_times_y(self):
        eq = random_eq(3, 8, 26)
        for j in range(20):
            y = stream(260 + j).random(8) + 0.1
            lhs = scaled_residual_jacobian(eq, y) @ y
            npt.assert_allclose(lhs, eq.b / y, rtol=1e-12)


class TestNewtonMatrix:
    def test_identity_tensor_closed_form(self):
        eq = identity_eq([2.0, 2.0])  # scaled b = (1, 1)
        y = np.array([0.5, 2.0])
        M = newton_matrix(eq, y)
        npt.assert_allclose(M, np.diag(eq.b / y), rtol=1e-14)

    def test_matrix_times_y_equals_b(self):
        for (m, n, s) in [(3, 10, 27), (4, 10, 28)]:
            eq = random_eq(m, n, s)
            for j in range(50):
                y = stream(2000 * m + j).random(n) + 0.05
                npt.assert_allclose(newton_matrix(eq, y) @ y, eq.b, rtol=0,
                                    atol=1e-12 * (1 + np.linalg.norm(eq.b)))

    def test_certificate_for_positive_b(self):
        eq = random_eq(3, 10, 29)
        assert eq.b_class == B_POSITIVE
        for j in range(50):
            y = stream(290 + j).random(10) + 0.05
            assert m_matrix_certificate(newton_matrix(eq, y), y)


class TestMaxFeasibleStep:
    def test_single_positive_component(self):
        eq = identity_eq([1.0, 2.0])  # omega = 2, so residual_y(y) = y/2 - b
        # pick y so the map value is (0.25, -0.5): positive part only at index 0
        y = 2.0 * (eq.b + np.array([0.25, -0.5]))
        f = residual_y(eq, y)
        npt.assert_allclose(f, [0.25, -0.5], rtol=1e-14)
        assert max_feasible_step(eq, y) == pytest.approx(eq.b[0] / 0.25, rel=1e-12)

    def test_no_positive_component_is_unbounded(self):
        eq = identity_eq([1.0, 2.0])
        y = eq.b  # map value b/2 - b < 0 everywhere
        assert max_feasible_step(eq, y) == np.inf

    def test_min_over_components(self):
        eq = identity_eq([1.0, 1.0])  # scaled b = (1, 1)
        y = eq.b + np.array([2.0, 4.0])
        assert max_feasible_step(eq, y) == pytest.approx(0.25, rel=1e-12)

    def test_bound_preserves_positivity_of_b_minus_alpha_f(self):
        eq = random_eq(3, 6, 30)
        y = stream(300).random(6) + 0.2
        bound = max_feasible_step(eq, y)
        if np.isfinite(bound):
            f = residual_y(eq, y)
            assert ((eq.b - 0.999 * bound * f) > 0).all()


class TestRegularizedMaps:
    def test_residual_value(self):
        # omega = 1: first component t, the rest (y - b)/y + t*y
        eq = identity_eq([0.5, 0.5])
        y = np.array([0.25, 1.0])
        out = regularized_residual(eq, 0.01, y)
        npt.assert_allclose(out, [0.01, -1.0 + 0.01 * 0.25, 0.5 + 0.01 * 1.0], rtol=1e-13)

    def test_small_t_limit(self):
        eq = identity_eq([2.0, 2.0])
        y = np.array([0.5, 2.0])
        base = scaled_residual(eq, y)
        out = regularized_residual(eq, 1e-12, y)
        npt.assert_allclose(out[1:], base, atol=1e-11)
        assert out[0] == 1e-12

    def test_norm_at_least_t(self):
        eq = identity_eq([2.0, 2.0])
        assert np.linalg.norm(regularized_residual(eq, 0.3, np.ones(2))) >= 0.3

    def test_jacobian_closed_form_identity_tensor(self):
        eq = identity_eq([2.0, 2.0])
        y = np.array([0.5, 2.0])
        t = 0.01
        J = regularized_jacobian(eq, t, y)
        npt.assert_array_equal(J[0], [1.0, 0.0, 0.0])
        npt.assert_allclose(J[1:, 0], y, rtol=1e-15)
        npt.assert_allclose(J[1:, 1:], np.diag(eq.b / y ** 2) + t * np.eye(2), rtol=1e-13)

    def test_jacobian_finite_difference(self):
        eq = random_eq(3, 6, 31)
        y = stream(310).random(6) + 0.3
        t = 0.05
        z = np.concatenate(([t], y))
        J = regularized_jacobian(eq, t, y)
        Jfd = central_fd(lambda v: regularized_residual(eq, v[0], v[1:]), z)
        npt.assert_allclose(J, Jfd, rtol=1e-6, atol=1e-8)

    def test_certificate_with_zeros_in_b(self):
        rng = stream(32)
        arr = semi_symmetrize(DenseTensor(rng.random((8,) * 3))).array
        s = 1.01 * arr.reshape(8, -1).sum(axis=1).max()
        A = DenseTensor(s * identity_tensor(3, 8).array - arr, "semi-symmetric")
        b = rng.random(8)
        b[[1, 4]] = 0.0
        eq = make_equation(A, b)
        assert eq.b_class == B_WITH_ZEROS
        for j in range(20):
            y = stream(320 + j).random(8) + 0.05
            t = 10.0 ** stream(340 + j).uniform(-4, -1)
            block = regularized_jacobian(eq, t, y)[1:, 1:]
            assert m_matrix_certificate(block, y)

    def test_domain_guards(self):
        eq = identity_eq([2.0, 2.0])
        with pytest.raises(ValueError):
            regularized_residual(eq, 0.0, np.ones(2))
        with pytest.raises(ValueError):
            regularized_jacobian(eq, 0.01, np.array([1.0, -1.0]))


class TestReduction:
    def build(self, entries, b, n=2, m=3):
        arr = np.zeros((n,) * m)
        for idx, v in entries.items():
            arr[idx] = v
        return make_equation(DenseTensor(arr, "semi-symmetric"), np.asarray(b, dtype=float))

    def test_positive_b_is_untouched(self):
        eq = identity_eq([1.0, 2.0])
        red = reduce_zero_pattern(eq)
        assert red.zero_set == () and red.support == (0, 1)
        assert red.reduced is eq

    def test_forced_zero_coordinate(self):
        eq = self.build({(0, 0, 0): 2.0, (1, 1, 1): 4.0, (1, 0, 0): -1.0}, [0.0, 1.0])
        red = reduce_zero_pattern(eq)
        assert red.zero_set == (0,) and red.support == (1,)
        # reduced equation is the scalar a_{222} x^2 = b_2, rescaled
        assert red.reduced.dim == 1
        x = np.sqrt(red.reduced.b[0] / red.reduced.tensor.array[0, 0, 0])
        full = embed_solution(red, np.array([x]))
        assert full[0] == 0.0
        assert np.linalg.norm(residual(eq, full)) <= 1e-12

    def test_coupled_row_is_deleted(self):
        eq = self.build({(0, 0, 0): 2.0, (0, 1, 1): 0.3, (1, 1, 1): 4.0}, [0.0, 1.0])
        red = reduce_zero_pattern(eq)
        assert red.zero_set == ()

    def test_all_zero_b(self):
        eq = self.build({(0, 0, 0): 2.0, (1, 1, 1): 4.0}, [0.0, 0.0])
        red = reduce_zero_pattern(eq)
        assert red.zero_set == (0, 1) and red.reduced is None
        x = embed_solution(red, np.zeros(0))
        npt.assert_array_equal(x, [0.0, 0.0])

    def test_invalid_b_rejected(self):
        eq = identity_eq([1.0, -1.0])
        with pytest.raises(ValueError):
            reduce_zero_pattern(eq)

    def test_embed_length_check(self):
        eq = identity_eq([1.0, 2.0])
        red = reduce_zero_pattern(eq)
        with pytest.raises(ValueError):
            embed_solution(red, np.ones(1))

    def test_matches_subset_enumeration_oracle(self):
        for j in range(25):
            rng = stream(400 + j)
            n = int(rng.integers(3, 7))
            eq = gen_reducible(3, n, rng, max_zero=min(4, n - 1))
            red = reduce_zero_pattern(eq)
            assert tuple(red.zero_set) == subset_zero_oracle(eq)

    def test_reduced_instance_solves_full_equation(self):
        rng = stream(41)
        eq = gen_reducible(3, 6, rng, max_zero=3)
        report = solve_regularized_newton(eq)
        assert report.status == "Converged"
        red = reduce_zero_pattern(eq)
        npt.assert_array_equal(report.x[list(red.zero_set)], 0.0)
        assert np.linalg.norm(residual(eq, report.x)) <= 1e-10


class TestScalingInvariance:
    def test_unscaled_residual_bound(self):
        rng = stream(42)
        arr = semi_symmetrize(DenseTensor(rng.random((6,) * 3))).array
        s = 1.01 * arr.reshape(6, -1).sum(axis=1).max()
        A_arr = 1e6 * (s * identity_tensor(3, 6).array - arr)
        b = 1e6 * rng.random(6)
        eq = make_equation(DenseTensor(A_arr, "semi-symmetric"), b)
        report = solve_regularized_newton(eq)
        assert report.status == "Converged"
        x = report.x
        original = np.einsum("ijk,j,k->i", A_arr, x, x) - b
        assert np.linalg.norm(original) <= eq.omega * 1e-10


class TestSerialization:
    def test_round_trip(self, tmp_path):
        eq = random_eq(3, 4, 43)
        base = tmp_path / "inst"
        save_equation(eq, base)
        back = load_equation(base)
        npt.assert_array_equal(back.tensor.array, eq.tensor.array)
        npt.assert_array_equal(back.b, eq.b)
        assert back.omega == eq.omega
        assert back.b_class == eq.b_class
        assert back.tensor.symmetry == eq.tensor.symmetry

    def test_header_contents(self, tmp_path):
        eq = identity_eq([1.0, 0.0])
        base = tmp_path / "inst"
        save_equation(eq, base)
        meta = (tmp_path / "inst.meta").read_text()
        assert "omega=1.0" in meta and "m=3" in meta and "n=2" in meta
        assert "b_class=nonnegative-with-zeros" in meta

    def test_b_class_mismatch_detected(self, tmp_path):
        eq = identity_eq([1.0, 2.0])
        base = tmp_path / "inst"
        save_equation(eq, base)
        meta_path = tmp_path / "inst.meta"
        meta_path.write_text(meta_path.read_text().replace(B_POSITIVE, B_WITH_ZEROS))
        with pytest.raises(ValueError):
            load_equation(base)
