"""
Unit tests for the finite-difference, SPSA and analytic gradient estimators.
"""

import numpy as np
import pytest

from cvqd.constants import DenoiserConstants as DNC
from cvqd.constants import VerifyConstants as VC
from cvqd.exceptions import ConfigError
from cvqd.physics.denoiser import DenoiserCircuit, ThetaVector, param_init
from cvqd.training.gradients import (
    grad_analytic,
    grad_central_fd,
    grad_spsa,
    loss_and_grad_analytic,
)
from cvqd.training.losses import batch_loss_fn, evaluate_batch
from cvqd.verify.gradient_suite import gradient_check_batch, gradient_check_config, relative_error


@pytest.fixture
def check_batch():
    """Config and loss plan of the gradient integrity check."""
    cfg = gradient_check_config(seed=0)
    return cfg, gradient_check_batch(cfg, np.random.default_rng(6))


@pytest.mark.unit
class TestFiniteDifferences:
    """Tests for central differences on closed-form functions."""

    def test_quadratic(self):
        """The central difference of sum(a x^2) is 2 a x."""
        weights = np.array([1.0, -2.0, 0.5])

        def loss(x):
            return float(np.sum(weights * x * x))

        x = np.array([0.3, -1.2, 2.0])
        np.testing.assert_allclose(grad_central_fd(loss, x, 1e-4), 2 * weights * x, rtol=1e-7)

    def test_accepts_theta_vector(self):
        """A ThetaVector is differentiated through its values."""
        theta = param_init(1, 0.1, seed=0)
        grad = grad_central_fd(lambda v: float(np.sum(v)), theta, 1e-3)
        np.testing.assert_allclose(grad, np.ones(DNC.PARAMS_PER_LAYER), rtol=1e-9)

    def test_threads_give_same_result(self):
        """Coordinate differences run on threads without changing the result."""

        def loss(x):
            return float(np.sum(np.sin(x)))

        x = np.linspace(0.0, 1.0, 7)
        np.testing.assert_array_equal(
            grad_central_fd(loss, x, 1e-5, workers=3), grad_central_fd(loss, x, 1e-5)
        )

    @pytest.mark.parametrize("step", [0.0, -1e-3])
    def test_step_must_be_positive(self, step):
        """fd_step <= 0 raises ConfigError."""
        with pytest.raises(ConfigError):
            grad_central_fd(lambda x: 0.0, np.zeros(2), step)


@pytest.mark.unit
class TestSpsa:
    """Tests for the simultaneous-perturbation estimator."""

    def test_exact_in_one_dimension(self, rng):
        """For a 1-D linear loss every direction recovers the slope."""
        grad = grad_spsa(lambda x: 3.0 * float(x[0]), np.array([0.7]), 1e-3, rng, n_avg=4)
        assert grad[0] == pytest.approx(3.0, rel=1e-9)

    def test_unbiased_for_linear_loss(self):
        """Averaged over many directions the estimate approaches the gradient."""
        slope = np.array([1.0, -0.5, 2.0])
        grad = grad_spsa(
            lambda x: float(slope @ x), np.zeros(3), 1e-3, np.random.default_rng(0), n_avg=4000
        )
        np.testing.assert_allclose(grad, slope, atol=0.15)

    def test_invalid_settings(self, rng):
        """Non-positive perturbation or zero directions raise ConfigError."""
        with pytest.raises(ConfigError):
            grad_spsa(lambda x: 0.0, np.zeros(2), 0.0, rng)
        with pytest.raises(ConfigError):
            grad_spsa(lambda x: 0.0, np.zeros(2), 1e-3, rng, n_avg=0)


@pytest.mark.unit
class TestAnalyticGradient:
    """Tests for the exact gradient of a loss plan."""

    @pytest.mark.parametrize("seed", range(VC.GRADIENT_CASES))
    def test_matches_central_differences(self, check_batch, seed):
        """Analytic and central-difference gradients agree to 1e-5 relative."""
        cfg, batch = check_batch
        theta = param_init(cfg.layers, VC.GRADIENT_PARAM_SCALE, seed=100 + seed)
        numeric = grad_central_fd(batch_loss_fn(batch, cfg.layers), theta, VC.GRADIENT_FD_STEP)
        assert relative_error(grad_analytic(theta, batch), numeric) <= VC.GRADIENT_REL_TOL

    def test_prediction_factor_reproduces_prediction(self, check_batch):
        """The factor the loss is scored on squares to the denoised state."""
        cfg, batch = check_batch
        term = batch.terms[-1]
        theta = param_init(cfg.layers, VC.GRADIENT_PARAM_SCALE, seed=7)
        circuit = DenoiserCircuit(theta, batch.embed, cfg.cutoff)
        prediction = circuit.denoise_step(term.rho_in, term.t)
        factor = circuit.prediction_factor(term.rho_in, term.t)
        assert factor.shape[0] == cfg.cutoff
        np.testing.assert_allclose(factor @ factor.conj().T, prediction.data, atol=1e-12)

    def test_loss_matches_evaluation(self, check_batch):
        """The forward sweep reports the same loss as evaluate_batch."""
        cfg, batch = check_batch
        theta = param_init(cfg.layers, 0.3, seed=2)
        diagnostics, _ = loss_and_grad_analytic(theta, batch)
        expected = evaluate_batch(theta, batch)
        assert diagnostics.loss_total == pytest.approx(expected.loss_total, rel=1e-10)
        assert diagnostics.timesteps == expected.timesteps

    def test_threads_give_same_gradient(self, check_batch):
        """Term contributions are summed in plan order for any worker count."""
        cfg, batch = check_batch
        theta = param_init(cfg.layers, 0.3, seed=2)
        np.testing.assert_array_equal(
            grad_analytic(theta, batch, workers=1), grad_analytic(theta, batch, workers=2)
        )

    def test_clamped_squeezing_has_zero_gradient(self, check_batch):
        """A squeezing parameter beyond the clamp does not move."""
        cfg, batch = check_batch
        values = param_init(cfg.layers, 0.2, seed=3).values.copy()
        values[DNC.S_A] = 2.0
        grad = grad_analytic(ThetaVector(values, cfg.layers), batch)
        assert grad[DNC.S_A] == 0.0
        assert np.any(grad != 0.0)
