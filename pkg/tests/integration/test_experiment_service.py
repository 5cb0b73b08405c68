"""
Integration tests for ExperimentService workflows.

Each test runs a workflow end to end on the tiny configs and checks the files
it writes.
"""

import json

import numpy as np
import pytest

from cvqd.constants import RuntimeConstants as RC
from cvqd.constants import TrainerConstants as TC
from cvqd.exceptions import CheckpointFormatError, ConfigError, StateFormatError
from cvqd.experiments.service import ExperimentService, thermal_start
from cvqd.physics.diffusion import Environment, corrupt, diffuse_to, linear_schedule
from cvqd.physics.fock import fidelity, make_coherent
from cvqd.storage.checkpoints import checkpoint_load
from cvqd.storage.files import read_csv
from cvqd.storage.states import load_state, save_state
from cvqd.training.sampling import coherent_target


@pytest.fixture
def service(tmp_path):
    """Service writing into a fresh output directory."""
    return ExperimentService(tmp_path / "out")


@pytest.mark.integration
class TestTraining:
    """Training workflows write a checkpoint and a metrics table."""

    def test_train_generative(self, service, tiny_generative_cfg):
        """Checkpoint and metrics land in the output directory."""
        outcome = service.train_generative(tiny_generative_cfg)
        assert [path.name for path in outcome.outputs] == [RC.CHECKPOINT_FILE, RC.METRICS_FILE]
        stored = checkpoint_load(outcome.outputs[0])
        assert stored.target == tiny_generative_cfg.target_spec()
        assert stored.theta == [float(v) for v in outcome.result.theta.values]
        rows = read_csv(outcome.outputs[1])
        assert len(rows) == tiny_generative_cfg.max_iters
        assert list(rows[0]) == list(TC.METRICS_COLUMNS)

    def test_train_generative_needs_target(self, service, tiny_generative_cfg):
        """A config without a target is rejected."""
        cfg = tiny_generative_cfg.model_copy(update={"target": None})
        with pytest.raises(ConfigError, match="target"):
            service.train_generative(cfg)

    def test_train_restoration(self, service, tiny_restoration_cfg):
        """Restoration checkpoints carry no target."""
        outcome = service.train_restoration(tiny_restoration_cfg)
        assert outcome.checkpoint.target is None
        assert service.path(RC.CHECKPOINT_FILE).exists()


@pytest.mark.integration
class TestGenerate:
    """Backward chains of generative checkpoints."""

    def test_generate_from_noise(self, service, generative_checkpoint, tiny_generative_cfg):
        """The chain writes the final state and a T + 1 row fidelity curve."""
        outcome = service.generate(generative_checkpoint)
        names = [path.name for path in outcome.outputs]
        assert names == [RC.STATE_FILE, RC.CURVE_FILE]
        assert len(outcome.curve) == tiny_generative_cfg.total_timesteps + 1
        assert outcome.curve[0][0] == tiny_generative_cfg.total_timesteps
        assert outcome.final_fidelity == outcome.curve[-1][1]
        saved = load_state(service.path(RC.STATE_FILE))
        np.testing.assert_array_equal(saved.data, outcome.state.data)

    def test_start_fidelity_is_noise_overlap(self, service, generative_checkpoint):
        """The curve starts at F(target, thermal start)."""
        outcome = service.generate(generative_checkpoint, nbar=0.2)
        target = make_coherent(0.5, 6).to_density()
        assert outcome.start_fidelity == pytest.approx(
            fidelity(target, thermal_start(0.2, 6)), abs=1e-9
        )

    def test_start_from_corrupted_target(self, service, generative_checkpoint):
        """start_eta starts from the target after one loss channel."""
        outcome = service.generate(generative_checkpoint, start_eta=0.9)
        target = make_coherent(0.5, 6).to_density()
        corrupted = corrupt(target, 0.9, Environment(0.0))
        assert outcome.start_fidelity == pytest.approx(fidelity(target, corrupted), abs=1e-9)

    def test_restoration_checkpoint_refused(self, service, restoration_checkpoint):
        """generate needs a generative checkpoint."""
        with pytest.raises(CheckpointFormatError, match="role"):
            service.generate(restoration_checkpoint)


@pytest.mark.integration
class TestRestore:
    """Backward chains of restoration checkpoints."""

    def test_synthetic_input(self, service, restoration_checkpoint):
        """s and eta_ch build the corrupted input and its reference."""
        outcome = service.restore(restoration_checkpoint, s=0.4, phase=0.3, eta_ch=0.8)
        assert outcome.curve is not None
        assert outcome.start_fidelity <= 1.0 + 1e-9

    def test_state_file_with_reference(self, service, restoration_checkpoint, tmp_path):
        """A loaded state with a clean reference gets a curve."""
        clean = coherent_target(0.4, 0.0, 6)
        noisy = corrupt(clean, 0.8, Environment(0.1))
        state = save_state(tmp_path / "noisy.json", noisy)
        reference = save_state(tmp_path / "clean.json", clean)
        outcome = service.restore(
            restoration_checkpoint, state_path=state, reference_path=reference
        )
        assert outcome.start_fidelity == pytest.approx(fidelity(clean, noisy), abs=1e-9)

    def test_state_file_without_reference(self, service, restoration_checkpoint, tmp_path):
        """Without a reference only the final state is written."""
        state = save_state(tmp_path / "noisy.json", coherent_target(0.3, 0.0, 6))
        outcome = service.restore(restoration_checkpoint, state_path=state)
        assert outcome.curve is None
        assert [path.name for path in outcome.outputs] == [RC.STATE_FILE]

    def test_input_forms(self, service, restoration_checkpoint, tmp_path):
        """Exactly one input form, and synthetic inputs need eta_ch."""
        state = save_state(tmp_path / "noisy.json", coherent_target(0.3, 0.0, 6))
        with pytest.raises(ConfigError):
            service.restore(restoration_checkpoint)
        with pytest.raises(ConfigError):
            service.restore(restoration_checkpoint, state_path=state, s=0.3, eta_ch=0.8)
        with pytest.raises(ConfigError, match="eta_ch"):
            service.restore(restoration_checkpoint, s=0.3)

    def test_cutoff_mismatch(self, service, restoration_checkpoint, tmp_path):
        """A state at another cutoff is a format error."""
        state = save_state(tmp_path / "small.json", coherent_target(0.3, 0.0, 5))
        with pytest.raises(StateFormatError, match="cutoff"):
            service.restore(restoration_checkpoint, state_path=state)


@pytest.mark.integration
class TestForwardProcess:
    """diffuse and schedule outputs."""

    def test_diffuse_state(self, service, tiny_generative_cfg):
        """The written state is the direct jump to t."""
        outcome = service.diffuse(tiny_generative_cfg, t=2)
        cfg = tiny_generative_cfg
        expected = diffuse_to(
            make_coherent(0.5, cfg.cutoff).to_density(),
            2,
            linear_schedule(cfg.eta0, cfg.etaT, cfg.total_timesteps),
            Environment(cfg.nbar),
        )
        np.testing.assert_array_equal(load_state(outcome.outputs[0]).data, expected.data)

    def test_diffuse_curve(self, service, tiny_generative_cfg):
        """F(rho_0, rho_t) for t = 0..T, starting near 1 and never increasing."""
        outcome = service.diffuse(tiny_generative_cfg, curve=True)
        values = [value for _, value in outcome.curve]
        assert len(values) == tiny_generative_cfg.total_timesteps + 1
        assert values[0] == pytest.approx(1.0, abs=1e-6)
        assert np.all(np.diff(values) <= 1e-12)

    def test_diffuse_needs_output(self, service, tiny_generative_cfg):
        """Neither t nor curve is a config error."""
        with pytest.raises(ConfigError):
            service.diffuse(tiny_generative_cfg)

    def test_schedule_table(self, service, tiny_generative_cfg):
        """One row per t = 0..T with an empty eta at t = 0."""
        rows = read_csv(service.write_schedule(tiny_generative_cfg))
        assert len(rows) == tiny_generative_cfg.total_timesteps + 1
        assert rows[0] == {"t": "0", "eta_t": "", "eta_bar_t": "1"}
        assert float(rows[-1]["eta_t"]) == pytest.approx(tiny_generative_cfg.etaT)


@pytest.mark.integration
def test_manifest_lists_outputs(service, tiny_generative_cfg):
    """The manifest records the command, seed and every written file."""
    outputs = [service.write_schedule(tiny_generative_cfg)]
    path = service.write_manifest("schedule", "2026-01-01T00:00:00+00:00", outputs, seed=5)
    manifest = json.loads(path.read_text())
    assert manifest["command"] == "schedule"
    assert manifest["seed"] == 5
    assert manifest["outputs"] == [str(outputs[0])]
    assert manifest["finished_at"] is not None
