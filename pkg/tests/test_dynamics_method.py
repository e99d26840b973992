"""Tests for the trajectory simulator."""

import numpy as np
import pytest

from iqvip.builtins import damped, example51, scalar_gain
from iqvip.certificates import (
    check_conditions_i_iii,
    check_continuous,
    time_varying_coefficients,
)
from iqvip.dynamics_method import DynamicsConfig, TrajectoryTrace
from iqvip.errors import ContractViolationError, DivergenceError
from iqvip.rates import estimate_rate


def damped_solution(t, x0, v0, sigma):
    """Closed-form solution of x'' + sigma x' = 0."""
    decay = np.exp(-sigma * t)
    return x0 + v0 * (1.0 - decay) / sigma, v0 * decay


class TestDynamicsConfig:
    """Test cases for DynamicsConfig."""

    def test_constants_become_callables(self):
        """Test that numbers are wrapped as constant coefficients."""
        config = DynamicsConfig(2.0, 3.0, [0.0], [1.0], horizon=1.0)
        assert config.sigma_fn(5.0) == 2.0
        assert config.tau_fn(0.0) == 3.0
        assert config.num_steps == 1000

    def test_num_steps_tolerates_rounding(self):
        """Test that 0.3 / 0.1 counts as three steps."""
        config = DynamicsConfig(1.0, 1.0, [0.0], [0.0], 0.3, step=0.1)
        assert config.num_steps == 3

    @pytest.mark.parametrize(
        "kwargs, message",
        [
            ({"step": 0.0}, "step"),
            ({"horizon": 0.0001}, "horizon"),
            ({"v0": [1.0, 2.0]}, "dimension"),
            ({"sigma_fn": lambda t: float("inf")}, "not finite"),
        ],
    )
    def test_invalid_configs_raise(self, kwargs, message):
        """Test validation of the initial value problem."""
        base = {
            "sigma_fn": 1.0,
            "tau_fn": 1.0,
            "x0": [0.0],
            "v0": [0.0],
            "horizon": 1.0,
        }
        base.update(kwargs)
        with pytest.raises(ContractViolationError, match=message):
            DynamicsConfig(**base)


class TestVectorField:
    """Test cases for vector_field."""

    def test_rest_at_solution(self):
        """Test that (x*, 0) is an equilibrium."""
        velocity, acceleration = example51().vector_field(
            3.0, 2.0, 0.0, [0.0, 0.0], [0.0, 0.0]
        )
        np.testing.assert_array_equal(velocity, [0.0, 0.0])
        np.testing.assert_array_equal(acceleration, [0.0, 0.0])

    def test_acceleration_uses_natural_map(self):
        """Test -tau B(u) - sigma v at (7, 5)."""
        velocity, acceleration = example51().vector_field(
            4.0, 2.0, 0.0, [7.0, 5.0], [1.0, -1.0]
        )
        np.testing.assert_array_equal(velocity, [1.0, -1.0])
        np.testing.assert_allclose(
            acceleration, [-28.0 - 4.0, -31.25 + 4.0], atol=1e-12
        )

    def test_time_dependent_coefficients(self):
        """Test that callables are evaluated at t."""
        _, acceleration = damped().vector_field(
            lambda t: t, 1.0, 2.0, [1.0, 1.0], [1.0, 0.5]
        )
        np.testing.assert_allclose(acceleration, [-2.0, -1.0])


class TestIntegrate:
    """Test cases for integrate."""

    def test_equilibrium_stays_put(self):
        """Test that the trajectory from (x*, 0) is constant."""
        trace = example51().integrate(
            DynamicsConfig(4.0, 1.0, [0.0, 0.0], [0.0, 0.0], 1.0, step=0.01)
        )
        assert np.all(trace.positions == 0.0)
        assert np.all(trace.velocities == 0.0)
        assert np.all(trace.dist == 0.0)

    def test_sample_times(self):
        """Test that sample k sits at k * dt."""
        trace = damped().integrate(
            DynamicsConfig(1.0, 1.0, [1.0, 1.0], [0.0, 0.0], 0.5, step=0.1)
        )
        np.testing.assert_allclose(trace.times, np.arange(6) * 0.1)
        assert len(trace) == 6
        assert trace.dist is None

    def test_damped_matches_closed_form_with_fourth_order(self):
        """Test RK4 accuracy and its convergence order on pure damping."""
        x0, v0, sigma = np.array([0.5, 0.5]), np.array([1.0, -2.0]), 2.0
        errors = []
        for dt in (0.1, 0.05):
            trace = damped().integrate(
                DynamicsConfig(sigma, 1.0, x0, v0, 2.0, step=dt)
            )
            x_exact, v_exact = damped_solution(trace.times[-1], x0, v0, sigma)
            errors.append(np.linalg.norm(trace.positions[-1] - x_exact))
            np.testing.assert_allclose(trace.velocities[-1], v_exact,
                                       atol=1e-5)
        assert errors[0] < 1e-5
        assert errors[0] / errors[1] >= 12.0

    def test_half_squared_distance(self):
        """Test that half_sq equals dist^2 / 2."""
        trace = example51().integrate(
            DynamicsConfig(4.0, 1.0, [7.0, 5.0], [0.0, 0.0], 0.5, step=0.01)
        )
        np.testing.assert_allclose(trace.half_sq, 0.5 * trace.dist**2)
        assert trace.samples[0].dist == pytest.approx(np.hypot(7.0, 5.0))

    def test_residual_column(self):
        """Test that residuals are |B(x(t))|."""
        problem = example51()
        trace = problem.integrate(
            DynamicsConfig(4.0, 1.0, [7.0, 5.0], [0.0, 0.0], 0.1, step=0.01)
        )
        for x, residual in zip(trace.positions, trace.residual):
            assert residual == pytest.approx(problem.residual_norm(x))

    def test_explicit_x_star(self):
        """Test distances against a caller-supplied point."""
        trace = damped().integrate(
            DynamicsConfig(1.0, 1.0, [3.0, 4.0], [0.0, 0.0], 0.1, step=0.1),
            x_star=[0.0, 0.0],
        )
        assert trace.dist[0] == pytest.approx(5.0)

    def test_dimension_mismatch_raises(self):
        """Test that a 3-D start is rejected for a 2-D problem."""
        with pytest.raises(ContractViolationError, match="dimension"):
            example51().integrate(
                DynamicsConfig(1.0, 1.0, [0.0] * 3, [0.0] * 3, 1.0)
            )

    def test_divergence_reports_time(self):
        """Test that negative damping blows up with a time stamp."""
        with pytest.raises(DivergenceError) as info:
            scalar_gain().integrate(
                DynamicsConfig(-10.0, 1.0, [1.0, 1.0], [0.0, 0.0], 5.0,
                               step=0.01)
            )
        error = info.value
        assert 2.0 < error.time <= 5.0
        assert isinstance(error.trace, TrajectoryTrace)
        assert np.all(np.isfinite(error.trace.positions))


class TestConvergence:
    """Convergence of certified trajectories."""

    def test_admissible_pair_gives_monotone_distance(self):
        """Test monotone decay in the tail under the constant conditions."""
        problem = scalar_gain()
        constants = problem.certify()
        sigma, tau = 1e4, 1e6
        assert check_continuous(constants, sigma, tau)
        trace = problem.integrate(
            DynamicsConfig(sigma, tau, [1.0, 1.0], [0.0, 0.0], 0.2,
                           step=1e-4)
        )
        tail = trace.dist[len(trace.dist) // 2:]
        assert np.all(np.diff(tail) <= 1e-9)
        rate = estimate_rate(trace)
        assert rate.zeta > 0

    def test_shifted_coefficients_converge(self):
        """Test a trajectory with sigma(t) and tau(t) from the shifted family."""
        problem = scalar_gain()
        sigma_fn, tau_fn = time_varying_coefficients(1e4, 1e6)
        assert check_conditions_i_iii(
            problem.certify(), sigma_fn, tau_fn, np.linspace(0.0, 0.2, 201)
        )
        trace = problem.integrate(
            DynamicsConfig(sigma_fn, tau_fn, [1.0, 1.0], [0.0, 0.0], 0.2,
                           step=1e-4)
        )
        assert trace.dist[-1] < trace.dist[0]

    def test_example_rate_is_stable_under_refinement(self):
        """Test the fitted rate on example51 for dt and dt/2."""
        problem = example51()
        rates = []
        for dt in (0.002, 0.001):
            trace = problem.integrate(
                DynamicsConfig(20.0, 25.0, [7.0, 5.0], [0.0, 0.0], 6.0,
                               step=dt)
            )
            rates.append(estimate_rate(trace, tail_fraction=0.5))
        assert rates[0].zeta > 0
        assert rates[0].r_squared >= 0.98
        assert abs(rates[0].zeta - rates[1].zeta) < 0.01 * rates[1].zeta
