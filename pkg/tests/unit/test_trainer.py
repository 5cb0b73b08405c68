"""
Unit tests for the generative and restoration training loops.

Runs use the tiny configs from conftest (c = 6, one layer, T = 4) and finish in
a few seconds.
"""

import numpy as np
import pytest

from cvqd.constants import GradMode, ScheduleKind
from cvqd.exceptions import CutoffTooSmall
from cvqd.physics.fock import make_coherent
from cvqd.training.sampling import RestorationSampler
from cvqd.training.trainer import (
    MetricsRow,
    has_converged,
    schedule_for,
    train_generative,
    train_restoration,
)


@pytest.fixture
def target(tiny_generative_cfg):
    """Coherent |0.5> at the tiny cutoff."""
    return make_coherent(0.5, tiny_generative_cfg.cutoff).to_density()


def _losses(result):
    return [(row.iteration, row.lr, row.loss_total, row.loss_t0) for row in result.metrics]


@pytest.mark.unit
class TestHelpers:
    """Tests for schedule selection and the convergence rule."""

    def test_eta_schedule(self, tiny_generative_cfg):
        """The default schedule uses the eta endpoints."""
        schedule = schedule_for(tiny_generative_cfg)
        assert schedule.total_timesteps == 4
        assert schedule.eta_at(4) == pytest.approx(0.7)

    def test_beta_schedule(self, tiny_generative_cfg):
        """schedule = beta ramps 1 - beta."""
        cfg = tiny_generative_cfg.model_copy(update={"schedule": ScheduleKind.BETA})
        assert schedule_for(cfg).eta_at(4) == pytest.approx(1.0 - cfg.beta_end)

    def test_has_converged(self):
        """A flat loss converges once the window is filled."""
        assert not has_converged([1.0] * 10, window=10, tol=1e-5)
        assert has_converged([1.0] * 11, window=10, tol=1e-5)
        assert not has_converged([2.0] + [1.0] * 10, window=10, tol=1e-5)


@pytest.mark.unit
class TestTrainGenerative:
    """Tests for the fixed-target training loop."""

    def test_runs_iteration_budget(self, tiny_generative_cfg, target):
        """Three iterations give three metrics rows and a summary."""
        rows = []
        result = train_generative(target, tiny_generative_cfg, callback=rows.append)
        assert len(result.metrics) == 3
        assert rows == result.metrics
        assert all(isinstance(row, MetricsRow) for row in rows)
        assert [row.iteration for row in rows] == [0, 1, 2]
        assert result.summary.iterations == 3
        assert result.summary.best_loss <= result.summary.initial_loss
        assert result.theta.layers == tiny_generative_cfg.layers

    def test_metrics_row_order(self, tiny_generative_cfg, target):
        """as_tuple follows the metrics column order."""
        row = train_generative(target, tiny_generative_cfg).metrics[0]
        values = row.as_tuple()
        assert values[0] == 0
        assert values[2] == row.loss_total
        assert len(values) == 7

    def test_same_seed_same_run(self, tiny_generative_cfg, target):
        """A run is reproducible from its seed."""
        first = train_generative(target, tiny_generative_cfg)
        second = train_generative(target, tiny_generative_cfg)
        assert _losses(first) == _losses(second)
        np.testing.assert_array_equal(first.theta.values, second.theta.values)

    def test_workers_do_not_change_run(self, tiny_generative_cfg, target):
        """Threaded evaluation gives the identical trajectory."""
        threaded = tiny_generative_cfg.model_copy(update={"workers": 2})
        assert _losses(train_generative(target, threaded)) == _losses(
            train_generative(target, tiny_generative_cfg)
        )

    def test_finite_difference_mode(self, tiny_generative_cfg, target):
        """central_fd evaluates the same first batch as the analytic mode."""
        cfg = tiny_generative_cfg.model_copy(
            update={"grad_mode": GradMode.CENTRAL_FD, "max_iters": 1}
        )
        fd_run = train_generative(target, cfg)
        analytic_run = train_generative(target, tiny_generative_cfg)
        assert fd_run.metrics[0].loss_total == pytest.approx(
            analytic_run.metrics[0].loss_total, abs=1e-10
        )

    def test_spsa_mode(self, tiny_generative_cfg, target):
        """SPSA runs produce finite losses."""
        cfg = tiny_generative_cfg.model_copy(update={"grad_mode": GradMode.SPSA})
        result = train_generative(target, cfg)
        assert all(np.isfinite(row.loss_total) for row in result.metrics)

    def test_target_too_large_for_cutoff(self, tiny_generative_cfg):
        """|2> at c = 6 is refused before training starts."""
        with pytest.raises(CutoffTooSmall):
            train_generative(make_coherent(2.0, 6).to_density(), tiny_generative_cfg)


@pytest.mark.unit
class TestTrainRestoration:
    """Tests for the random-target training loop."""

    def test_runs(self, tiny_restoration_cfg):
        """Two iterations with a thermal environment."""
        cfg = tiny_restoration_cfg
        result = train_restoration(RestorationSampler(cfg.s_max, seed=cfg.seed), cfg)
        assert len(result.metrics) == 2
        assert result.final_theta is not None
        assert all(0.0 <= row.mean_step_fidelity <= 1.0 + 1e-9 for row in result.metrics)

    def test_amplitude_too_large_for_cutoff(self, tiny_restoration_cfg):
        """s_max = 3 does not fit c = 6."""
        with pytest.raises(CutoffTooSmall):
            train_restoration(RestorationSampler(3.0, seed=0), tiny_restoration_cfg)
