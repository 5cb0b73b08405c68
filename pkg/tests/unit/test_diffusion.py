"""
Unit tests for noise schedules and the thermal loss channel.
"""

import math

import numpy as np
import pytest

from cvqd.constants import DiffusionConstants as DC
from cvqd.exceptions import ConfigError, InvalidState
from cvqd.physics.diffusion import (
    DiffusionTrajectory,
    Environment,
    beta_schedule,
    beta_to_eta,
    corrupt,
    diffuse_to,
    eta_to_beta,
    linear_schedule,
    schedule_from_etas,
    schedule_rows,
    thermal_loss_step,
)
from cvqd.physics.fock import (
    fidelity,
    make_coherent,
    make_fock,
    make_thermal,
    make_vacuum,
    quadrature_mean,
    quadrature_variance,
    renormalize,
    tensor_product,
    trace_distance,
)
from tests.helpers.assertions import assert_density_valid, assert_states_close
from tests.helpers.oracles import literal_loss_channel, sequential_diffusion
from tests.helpers.states import random_coherent, random_low_photon_state, random_state


@pytest.mark.unit
class TestNoiseSchedule:
    """Tests for schedule construction and lookup."""

    def test_linear_endpoints(self):
        """eta_T is the last step and eta_bar is the running product."""
        schedule = linear_schedule(0.99, 0.70, 30)
        assert schedule.eta_at(30) == 0.70
        assert schedule.eta_bar_at(0) == 1.0
        np.testing.assert_allclose(schedule.eta_bar[1:], np.cumprod(schedule.eta))

    def test_linear_ramp_values(self):
        """eta_t = eta0 + (etaT - eta0) t / T."""
        schedule = linear_schedule(1.0, 0.5, 5)
        np.testing.assert_allclose(schedule.eta, [0.9, 0.8, 0.7, 0.6, 0.5])

    def test_eta_bar_never_increases(self):
        """Cumulative transmissivity is monotone non-increasing."""
        schedule = linear_schedule(0.99, 0.70, 30)
        assert np.all(np.diff(schedule.eta_bar) <= 0.0)

    def test_full_scale_endpoint(self):
        """The full-scale schedule ends near eta_bar = 0.676."""
        schedule = linear_schedule(DC.FULL_SCALE_ETA_0, DC.FULL_SCALE_ETA_T, 112)
        assert schedule.eta_bar_at(112) == pytest.approx(0.676, abs=0.01)

    @pytest.mark.parametrize("eta0, etaT, steps", [(1.2, 0.9, 5), (0.9, -0.1, 5), (0.9, 0.8, 0)])
    def test_invalid_schedule(self, eta0, etaT, steps):
        """Endpoints outside [0, 1] or T < 1 raise ConfigError."""
        with pytest.raises(ConfigError):
            linear_schedule(eta0, etaT, steps)

    def test_timestep_out_of_range(self):
        """Lookups outside the schedule raise ConfigError."""
        schedule = linear_schedule(0.99, 0.9, 4)
        with pytest.raises(ConfigError):
            schedule.eta_at(0)
        with pytest.raises(ConfigError):
            schedule.eta_bar_at(5)

    def test_increasing_eta_bar_rejected(self):
        """A cumulative product that grows is not a schedule."""
        schedule = linear_schedule(0.99, 0.9, 3)
        with pytest.raises(ConfigError):
            schedule.with_eta_bar([1.0, 0.9, 0.95, 0.8])

    def test_beta_mapping(self):
        """eta = 1 - beta at both endpoints, and back."""
        assert beta_to_eta(1e-4, 0.05, 112) == pytest.approx((0.9999, 0.95))
        assert eta_to_beta(0.9999, 0.95) == pytest.approx((1e-4, 0.05))
        assert beta_schedule(1e-4, 0.05, 10).eta_at(10) == pytest.approx(0.95)

    def test_beta_outside_unit_interval(self):
        """beta must lie strictly inside (0, 1)."""
        with pytest.raises(ConfigError):
            beta_to_eta(0.0, 0.05, 10)

    def test_schedule_rows(self):
        """One row per t = 0..T, with no eta at t = 0."""
        rows = schedule_rows(linear_schedule(0.99, 0.9, 4))
        assert len(rows) == 5
        assert rows[0] == (0, None, 1.0)
        assert rows[-1][0] == 4
        assert rows[-1][1] == 0.9

    def test_arbitrary_etas(self):
        """schedule_from_etas keeps the given per-step values."""
        schedule = schedule_from_etas([0.9, 0.8])
        assert schedule.total_timesteps == 2
        assert schedule.eta_bar_at(2) == pytest.approx(0.72)


@pytest.mark.unit
class TestThermalLossStep:
    """Tests for the block-evaluated thermal loss channel."""

    def test_identity_at_unit_transmissivity(self):
        """eta = 1 leaves the state unchanged."""
        rho = make_coherent(0.7 * np.exp(0.4j), 12).to_density()
        out = thermal_loss_step(rho, 1.0, Environment(0.5))
        assert_states_close(out, rho, atol=1e-10)

    def test_zero_transmissivity_gives_environment(self):
        """eta = 0 replaces the system by the renormalized thermal state."""
        env = Environment(0.5)
        out = thermal_loss_step(make_fock(2, 8), 0.0, env)
        assert_states_close(out, renormalize(make_thermal(0.5, 8)), atol=1e-10)

    def test_agrees_with_literal_composition(self, rng):
        """Block evaluation equals embed, beamsplitter, trace and truncate."""
        env = Environment(0.4)
        for _ in range(3):
            rho = random_state(rng, 5)
            eta = float(rng.uniform(0.2, 0.95))
            assert_states_close(
                thermal_loss_step(rho, eta, env), literal_loss_channel(rho, eta, env), 1e-10
            )

    def test_pure_loss_preserves_trace_of_low_photon_input(self, rng):
        """With nbar = 0 nothing can leave the truncated space."""
        rho = random_low_photon_state(rng, 8, levels=4)
        out = thermal_loss_step(rho, 0.6, Environment(0.0))
        assert out.trace == pytest.approx(rho.trace, abs=1e-12)

    def test_thermal_environment_leaks_only_past_cutoff(self, rng):
        """The output trace drops below the input only through truncation."""
        rho = random_state(rng, 6)
        out = thermal_loss_step(rho, 0.5, Environment(1.0))
        assert out.trace <= rho.trace + 1e-12
        assert_density_valid(out)

    def test_first_moments_scale_with_sqrt_eta(self):
        """<x> and <p> shrink by sqrt(eta) for any nbar."""
        rho = make_coherent(0.7 * np.exp(0.4j), 20).to_density()
        out = thermal_loss_step(rho, 0.6, Environment(0.5))
        for q in ("x", "p"):
            assert quadrature_mean(out, q) == pytest.approx(
                math.sqrt(0.6) * quadrature_mean(rho, q), abs=DC.FIRST_MOMENT_TOL
            )

    def test_variance_law(self):
        """A coherent input leaves with variance 1/2 + (1 - eta) nbar."""
        rho = make_coherent(0.7, 25).to_density()
        out = thermal_loss_step(rho, 0.5, Environment(0.5))
        assert quadrature_variance(out, "x") == pytest.approx(0.75, abs=DC.VARIANCE_LAW_TOL)

    def test_coherent_under_pure_loss_stays_coherent(self):
        """|alpha> -> |sqrt(eta) alpha> when nbar = 0."""
        out = thermal_loss_step(make_coherent(0.8, 20).to_density(), 0.5, Environment(0.0))
        expected = make_coherent(0.8 * math.sqrt(0.5), 20).to_density()
        assert fidelity(expected, out) == pytest.approx(1.0, abs=1e-10)

    def test_rejects_two_mode_input(self):
        """The channel acts on one mode."""
        joint = tensor_product(make_vacuum(3), make_vacuum(3))
        with pytest.raises(InvalidState):
            thermal_loss_step(joint, 0.5, Environment(0.0))

    def test_rejects_transmissivity_outside_unit_interval(self):
        """eta = 1.2 raises InvalidState."""
        with pytest.raises(InvalidState):
            thermal_loss_step(make_vacuum(3), 1.2, Environment(0.0))

    def test_negative_environment(self):
        """Negative occupation raises ConfigError."""
        with pytest.raises(ConfigError):
            Environment(-0.5)

    def test_corrupt_is_one_channel(self):
        """corrupt applies a single loss channel."""
        rho = make_coherent(0.5, 10).to_density()
        env = Environment(0.3)
        assert_states_close(corrupt(rho, 0.7, env), thermal_loss_step(rho, 0.7, env), 0.0)


@pytest.mark.unit
class TestDirectJump:
    """Tests for diffuse_to and the diffusion trajectory."""

    def test_zero_timestep_is_input(self):
        """t = 0 returns the input object."""
        rho = make_vacuum(4)
        assert diffuse_to(rho, 0, linear_schedule(0.99, 0.9, 3), Environment(0.2)) is rho

    def test_jump_equals_sequential_steps_pure_loss(self, rng):
        """One channel with eta_bar_t equals t channels applied in turn."""
        env = Environment(0.0)
        for _ in range(5):
            etas = rng.uniform(0.7, 1.0, int(rng.integers(1, 7)))
            rho = random_coherent(rng, 12)
            direct = diffuse_to(rho, len(etas), schedule_from_etas(etas), env)
            assert_states_close(direct, sequential_diffusion(rho, etas, env), DC.DIRECT_JUMP_TOL)

    def test_jump_equals_sequential_steps_thermal(self, rng):
        """The same holds with a thermal environment at a wide cutoff."""
        env = Environment(0.5)
        etas = [0.95, 0.8, 0.9]
        rho = random_coherent(rng, 24)
        direct = diffuse_to(rho, 3, schedule_from_etas(etas), env)
        assert_states_close(direct, sequential_diffusion(rho, etas, env), DC.DIRECT_JUMP_TOL)

    def test_desk_endpoint_is_near_vacuum(self):
        """Under pure loss F(rho_T, |0>) = exp(-eta_bar_T |alpha|^2)."""
        schedule = linear_schedule(0.99, 0.70, 30)
        rho_T = diffuse_to(make_coherent(1.0, 12).to_density(), 30, schedule, Environment(0.0))
        expected = math.exp(-schedule.eta_bar_at(30))
        assert fidelity(make_vacuum(12), rho_T) == pytest.approx(expected, abs=1e-8)
        assert expected >= 0.99

    def test_fock_endpoint_keeps_little_population(self):
        """|1> ends with population eta_bar_T in |1>."""
        schedule = linear_schedule(0.99, 0.70, 30)
        rho_T = diffuse_to(make_fock(1, 8), 30, schedule, Environment(0.0))
        assert fidelity(make_fock(1, 8), rho_T) <= 0.1

    def test_fidelity_decreases_along_trajectory(self):
        """F(rho_0, rho_t) never increases with t under pure loss."""
        rho = make_coherent(1.0, 12).to_density()
        trajectory = DiffusionTrajectory.build(rho, linear_schedule(0.99, 0.7, 10), Environment())
        assert len(trajectory) == 11
        assert trajectory[0] is rho
        values = [fidelity(rho, state) for state in trajectory]
        assert np.all(np.diff(values) <= 1e-12)

    def test_trajectory_matches_direct_jumps(self):
        """Each trajectory entry is the direct jump to its timestep."""
        rho = make_coherent(0.5, 8).to_density()
        schedule = linear_schedule(0.98, 0.8, 5)
        env = Environment(0.3)
        trajectory = DiffusionTrajectory.build(rho, schedule, env)
        for t, state in enumerate(trajectory):
            assert trace_distance(state, diffuse_to(rho, t, schedule, env)) == 0.0
