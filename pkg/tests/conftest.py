"""Pytest configuration and fixtures for CVQD tests."""

import logging

import numpy as np
import pytest
from click.testing import CliRunner


def pytest_configure(config):
    """Register custom test markers."""
    config.addinivalue_line("markers", "unit: Unit tests of one module in isolation")
    config.addinivalue_line(
        "markers", "integration: Integration tests combining multiple components"
    )
    config.addinivalue_line(
        "markers", "acceptance: Full-size runs that reproduce the reference fidelities"
    )
    config.addinivalue_line("markers", "slow: Tests that take significant time (>5 seconds)")


@pytest.fixture
def rng():
    """Seeded generator so random cases are reproducible."""
    return np.random.default_rng(1234)


@pytest.fixture
def cli_runner():
    """Click CLI test runner."""
    return CliRunner()


@pytest.fixture(autouse=True)
def reset_root_logger():
    """Undo a --verbose flag left on the root logger by a previous CLI invocation."""
    root = logging.getLogger()
    level = root.level
    yield
    root.setLevel(level)


# =============================================================================
# Small training configurations
# =============================================================================


@pytest.fixture
def tiny_generative_cfg():
    """Few-second generative config: c=6, one layer, T=4, two sampled timesteps."""
    from cvqd.models.config import TrainConfig

    return TrainConfig(
        cutoff=6,
        layers=1,
        total_timesteps=4,
        eta0=0.95,
        etaT=0.7,
        batch_size=2,
        max_iters=3,
        lr0=0.01,
        decay_steps=10,
        decay_rate=0.9,
        lambda_=0.5,
        gamma=10.0,
        grad_mode="analytic",
        seed=5,
        target="coherent",
        target_alpha=0.5,
    )


@pytest.fixture
def tiny_restoration_cfg():
    """Few-second restoration config with a thermal environment."""
    from cvqd.models.config import TrainConfig

    return TrainConfig(
        cutoff=6,
        layers=1,
        total_timesteps=4,
        eta0=0.95,
        etaT=0.8,
        nbar=0.5,
        batch_size=2,
        max_iters=2,
        lr0=0.005,
        decay_steps=10,
        decay_rate=0.9,
        lambda_=0.5,
        gamma=10.0,
        grad_mode="analytic",
        seed=3,
        s_max=0.5,
    )


TINY_CONFIG_TOML = """\
cutoff_dim = 6
layers = 1
total_timesteps = 4
batch_size = 2
epochs = 2
eta_0 = 0.95
eta_T = 0.7
lambda = 0.5
gamma = 10.0
initial_learning_rate = 0.01
decay_steps = 10
decay_rate = 0.9
grad_mode = "analytic"
seed = 1
target = "coherent"
target_alpha = 0.5
"""


@pytest.fixture
def tiny_config_file(tmp_path):
    """Path of a TOML config for a generative run that finishes in seconds."""
    path = tmp_path / "tiny.toml"
    path.write_text(TINY_CONFIG_TOML)
    return path


# =============================================================================
# Checkpoint files
# =============================================================================


def _identity_checkpoint(path, role, cfg):
    from cvqd.physics.denoiser import ThetaVector
    from cvqd.storage.checkpoints import checkpoint_save, make_checkpoint

    theta = ThetaVector.zeros(cfg.layers)
    return checkpoint_save(path, make_checkpoint(role, cfg, theta, cfg.target_spec()))


@pytest.fixture
def generative_checkpoint(tmp_path, tiny_generative_cfg):
    """Generative checkpoint file whose denoiser is the identity circuit."""
    from cvqd.constants import Role

    return _identity_checkpoint(tmp_path / "gen.json", Role.GENERATIVE, tiny_generative_cfg)


@pytest.fixture
def restoration_checkpoint(tmp_path, tiny_restoration_cfg):
    """Restoration checkpoint file whose denoiser is the identity circuit."""
    from cvqd.constants import Role

    return _identity_checkpoint(tmp_path / "restore.json", Role.RESTORATION, tiny_restoration_cfg)
