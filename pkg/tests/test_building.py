import numpy as np
import pytest
from scipy.integrate import solve_ivp

from sensoropt import (
    PARAMETER_NAMES,
    SystemParameters,
    TimeGrid,
    UnsupportedDampingError,
    build_model,
    build_uniform_shear_model,
    default_prior,
    modal_constants,
    modal_response,
    physical_response,
    response_sensitivities,
    sample_prior,
)

PRIOR_MEANS = SystemParameters(
    omega0=2 * np.pi, alpha=0.1, beta=1e-4, omega=2 * np.pi * 0.9, a0=3.0
)


def _ode_mode(wj, zj, aj, w, t_end, t_eval):
    def rhs(t, y):
        return [y[1], aj * np.sin(w * t) - 2 * zj * wj * y[1] - wj**2 * y[0]]

    return solve_ivp(
        rhs, (0.0, t_end), [0.0, 0.0], method="DOP853",
        rtol=1e-11, atol=1e-13, t_eval=t_eval, dense_output=True,
    )


class TestBuildUniformShearModel:
    def test_three_story_matrices(self):
        model = build_uniform_shear_model(3)
        expected_k = np.array([[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]])
        np.testing.assert_array_equal(model.stiffness_pattern, expected_k)
        np.testing.assert_array_equal(model.mass_pattern, np.eye(3))

    def test_single_story_degenerate(self):
        model = build_uniform_shear_model(1)
        np.testing.assert_array_equal(model.stiffness_pattern, [[1.0]])
        np.testing.assert_array_equal(model.eigenvalues, [1.0])
        np.testing.assert_array_equal(model.eigenvectors, [[1.0]])

    def test_two_story_eigenvalues_by_hand(self):
        # roots of lambda^2 - 3 lambda + 1 = 0
        model = build_uniform_shear_model(2)
        expected = np.array([(3 - np.sqrt(5)) / 2, (3 + np.sqrt(5)) / 2])
        np.testing.assert_allclose(model.eigenvalues, expected, rtol=1e-12)

    def test_zero_dof_rejected(self):
        with pytest.raises(ValueError):
            build_uniform_shear_model(0)

    @pytest.mark.parametrize("n_dof", [1, 2, 5, 17, 50])
    def test_eigen_invariants(self, n_dof):
        model = build_uniform_shear_model(n_dof)
        k, m, phi = model.stiffness_pattern, model.mass_pattern, model.eigenvectors
        lam = model.eigenvalues

        residual = k @ phi - m @ phi * lam
        scale = np.linalg.norm(k @ phi, axis=0)
        assert np.all(np.linalg.norm(residual, axis=0) <= 1e-10 * scale)

        gram = phi.T @ m @ phi
        off = gram - np.diag(np.diag(gram))
        assert np.max(np.abs(off)) <= 1e-10 * np.max(np.abs(np.diag(gram)))

        np.testing.assert_allclose(
            model.modal_stiffnesses / model.modal_masses, lam, rtol=1e-10
        )
        assert np.all(lam > 0)
        assert np.all(np.diff(lam) > 0)

    def test_general_builder_matches_uniform(self):
        uniform = build_uniform_shear_model(5)
        general = build_model(uniform.mass_pattern, uniform.stiffness_pattern)
        np.testing.assert_allclose(general.eigenvalues, uniform.eigenvalues, rtol=1e-12)
        np.testing.assert_allclose(
            np.abs(general.eigenvectors), np.abs(uniform.eigenvectors), atol=1e-10
        )

    def test_general_builder_spd_mass(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(4, 4))
        mass = a @ a.T + 4 * np.eye(4)
        model = build_model(mass, build_uniform_shear_model(4).stiffness_pattern)
        gram = model.eigenvectors.T @ mass @ model.eigenvectors
        off = gram - np.diag(np.diag(gram))
        assert np.max(np.abs(off)) <= 1e-10 * np.max(np.abs(np.diag(gram)))


class TestModalResponse:
    def test_zero_initial_displacement_exact(self):
        model = build_uniform_shear_model(3)
        q0 = modal_response(model, PRIOR_MEANS, np.array([0.0]))
        assert np.all(q0 == 0.0)

    def test_zero_initial_velocity(self):
        model = build_uniform_shear_model(3)
        h = 1e-8
        qdot0 = modal_response(model, PRIOR_MEANS, np.array([h]))[0] / h
        grid = TimeGrid(2000, 0.01)
        q = modal_response(model, PRIOR_MEANS, grid)
        qdot_scale = np.max(np.abs(np.diff(q, axis=0)), axis=0) / grid.dt
        assert np.all(np.abs(qdot0) < 1e-4 * qdot_scale)

    def test_zero_amplitude_means_zero_response(self):
        model = build_uniform_shear_model(2)
        theta = SystemParameters(6.0, 0.05, 1e-4, 5.0, 0.0)
        q = modal_response(model, theta, TimeGrid(100, 0.02))
        assert np.all(q == 0.0)

    def test_single_mode_against_ode_oracle(self):
        model = build_uniform_shear_model(1)
        theta = SystemParameters(omega0=1.0, alpha=0.02, beta=0.0, omega=1.0, a0=1.0)
        wj, zj, _, aj = modal_constants(model, theta)
        oracle = _ode_mode(wj[0], zj[0], aj[0], theta.omega, 10.0, [10.0])
        closed = modal_response(model, theta, np.array([10.0]))[0, 0]
        assert closed == pytest.approx(oracle.y[0][-1], rel=1e-6)

    def test_random_probes_against_ode_oracle(self):
        rng = np.random.default_rng(42)
        model = build_uniform_shear_model(2)
        samples = sample_prior(default_prior(), 10, seed=11)
        for k in range(10):
            theta = samples.parameters(k)
            t_probe = float(rng.uniform(1.0, 15.0))
            wj, zj, _, aj = modal_constants(model, theta)
            q_closed = modal_response(model, theta, np.array([t_probe]))[0]
            for j in range(2):
                oracle = _ode_mode(wj[j], zj[j], aj[j], theta.omega, t_probe, None)
                amp = np.max(np.abs(oracle.y[0]))
                assert abs(q_closed[j] - oracle.y[0][-1]) < 1e-6 * amp

    def test_ode_residual_of_closed_form(self):
        # Substitute finite differences of the closed form back into the
        # oscillator equation; the residual must vanish relative to the
        # modal forcing amplitude.
        model = build_uniform_shear_model(4)
        theta = PRIOR_MEANS
        wj, zj, _, aj = modal_constants(model, theta)
        dt = 0.01
        h = dt / 100
        probes = np.array([0.5, 2.0, 5.0, 9.97])
        stencil = np.concatenate([probes - h, probes, probes + h])
        q = modal_response(model, theta, stencil).reshape(3, probes.size, model.n_dof)
        q_minus, q_mid, q_plus = q
        qddot = (q_plus - 2 * q_mid + q_minus) / h**2
        qdot = (q_plus - q_minus) / (2 * h)
        forcing = aj * np.sin(theta.omega * probes)[:, None]
        residual = qddot + 2 * zj * wj * qdot + wj**2 * q_mid - forcing
        assert np.all(np.abs(residual) < 1e-6 * np.abs(aj))

    def test_overdamped_mode_rejected(self):
        model = build_uniform_shear_model(2)
        theta = SystemParameters(omega0=1.0, alpha=10.0, beta=0.0, omega=1.0, a0=1.0)
        with pytest.raises(UnsupportedDampingError):
            modal_response(model, theta, TimeGrid(10, 0.01))


class TestPhysicalResponse:
    def test_identity_mode_shapes(self):
        model = build_uniform_shear_model(3)
        q = np.arange(12, dtype=float).reshape(4, 3)
        x = physical_response(model, q)
        np.testing.assert_allclose(x, q @ model.eigenvectors.T, rtol=1e-15)

    def test_zero_modal_response(self):
        model = build_uniform_shear_model(3)
        assert np.all(physical_response(model, np.zeros((5, 3))) == 0.0)

    def test_hand_multiplied_row(self):
        rng = np.random.default_rng(3)
        model = build_uniform_shear_model(2)
        q = rng.normal(size=(1, 2))
        x = physical_response(model, q)
        phi = model.eigenvectors
        expected = [
            phi[0, 0] * q[0, 0] + phi[0, 1] * q[0, 1],
            phi[1, 0] * q[0, 0] + phi[1, 1] * q[0, 1],
        ]
        np.testing.assert_allclose(x[0], expected, rtol=1e-15)

    def test_linearity(self):
        rng = np.random.default_rng(4)
        model = build_uniform_shear_model(5)
        q1 = rng.normal(size=(7, 5))
        q2 = rng.normal(size=(7, 5))
        lhs = physical_response(model, q1 + q2)
        rhs = physical_response(model, q1) + physical_response(model, q2)
        np.testing.assert_allclose(lhs, rhs, atol=1e-13 * np.max(np.abs(lhs)))

    def test_shape_mismatch_rejected(self):
        model = build_uniform_shear_model(3)
        with pytest.raises(ValueError):
            physical_response(model, np.zeros((5, 4)))


def _fd_sensitivities(model, theta, times, rel_step=1e-6):
    base = theta.as_array()
    out = np.empty((len(times), model.n_dof, 5))
    for p in range(5):
        h = rel_step * abs(base[p]) if base[p] != 0 else rel_step
        plus, minus = base.copy(), base.copy()
        plus[p] += h
        minus[p] -= h
        x_plus = physical_response(model, modal_response(model, SystemParameters(*plus), times))
        x_minus = physical_response(model, modal_response(model, SystemParameters(*minus), times))
        out[:, :, p] = (x_plus - x_minus) / (2 * h)
    return out


class TestResponseSensitivities:
    def test_amplitude_derivative_is_response_over_a0(self):
        model = build_uniform_shear_model(3)
        times = np.array([1.0, 4.0, 8.5])
        x = physical_response(model, modal_response(model, PRIOR_MEANS, times))
        sens = response_sensitivities(model, PRIOR_MEANS, times)
        np.testing.assert_allclose(sens[:, :, 4], x / PRIOR_MEANS.a0, rtol=1e-12)

    def test_zero_amplitude(self):
        model = build_uniform_shear_model(2)
        theta = SystemParameters(6.0, 0.05, 1e-4, 5.0, 0.0)
        sens = response_sensitivities(model, theta, np.array([2.0, 3.0]))
        assert np.all(sens[:, :, :4] == 0.0)
        assert np.any(sens[:, :, 4] != 0.0)

    def test_prior_mean_probe_against_central_differences(self):
        model = build_uniform_shear_model(2)
        times = np.array([5.0])
        sens = response_sensitivities(model, PRIOR_MEANS, times)
        fd = _fd_sensitivities(model, PRIOR_MEANS, times)
        scale = np.max(np.abs(sens))
        rel = np.abs(sens - fd) / np.maximum(np.abs(sens), 1e-9 * scale)
        assert np.max(rel) < 1e-5

    def test_many_random_probes_against_central_differences(self):
        # >= 20 random (theta, t, story) probes.  The cube-root-of-eps
        # relative step balances truncation against cancellation in the
        # finite-difference oracle.
        rng = np.random.default_rng(5)
        samples = sample_prior(default_prior(), 8, seed=23)
        checked = 0
        for k in range(8):
            theta = samples.parameters(k)
            n_dof = int(rng.integers(1, 5))
            model = build_uniform_shear_model(n_dof)
            times = rng.uniform(0.5, 12.0, size=3)
            sens = response_sensitivities(model, theta, times)
            fd = _fd_sensitivities(model, theta, times, rel_step=6e-6)
            scale = np.max(np.abs(sens))
            rel = np.abs(sens - fd) / np.maximum(np.abs(sens), 1e-9 * scale)
            assert np.max(rel) < 1e-5
            checked += sens.shape[0] * sens.shape[1]
        assert checked >= 20

    def test_entries_finite_and_shaped(self):
        model = build_uniform_shear_model(4)
        grid = TimeGrid(50, 0.02)
        sens = response_sensitivities(model, PRIOR_MEANS, grid)
        assert sens.shape == (50, 4, 5)
        assert np.all(np.isfinite(sens))
        assert PARAMETER_NAMES == ("omega0", "alpha", "beta", "omega", "a0")
