"""
Experiment service for the command-line workflows.

Each method runs one workflow end to end (train, generate, diffuse, restore),
writes its files into the output directory and returns an outcome listing
every path it wrote, so the caller can record them in the run manifest.
"""

import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from cvqd.constants import DiffusionConstants as DC
from cvqd.constants import Role
from cvqd.constants import RuntimeConstants as RC
from cvqd.constants import TrainerConstants as TC
from cvqd.exceptions import ConfigError, StateFormatError
from cvqd.models.checkpoint import Checkpoint, RunManifest
from cvqd.models.config import TargetSpec, TrainConfig
from cvqd.models.states import DensityMatrix
from cvqd.physics.denoiser import ChainResult, DenoiserCircuit, TimeEmbedConfig
from cvqd.physics.diffusion import (
    DiffusionTrajectory,
    Environment,
    corrupt,
    diffuse_to,
    schedule_rows,
)
from cvqd.physics.fock import fidelity, make_thermal, renormalize
from cvqd.physics.targets import build_target, prepare_target
from cvqd.storage.checkpoints import (
    checkpoint_load,
    checkpoint_save,
    checkpoint_theta,
    make_checkpoint,
)
from cvqd.storage.files import write_csv, write_json
from cvqd.storage.states import load_state, save_state
from cvqd.training.sampling import RestorationSampler, coherent_target
from cvqd.training.trainer import (
    ProgressCallback,
    TrainingResult,
    schedule_for,
    train_generative,
    train_restoration,
)

logger = logging.getLogger(__name__)

CurveRows = List[Tuple[int, float]]


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def thermal_start(nbar: float, cutoff: int) -> DensityMatrix:
    """Unit-trace thermal state the generative chain starts from."""
    return renormalize(make_thermal(nbar, cutoff))


@dataclass
class TrainOutcome:
    """Training result and the files written for it."""

    result: TrainingResult
    checkpoint: Checkpoint
    outputs: List[Path] = field(default_factory=list)


@dataclass
class ChainOutcome:
    """
    Result of a backward chain run from the command line.

    Attributes:
        state: Final denoised state
        curve: (t, fidelity) rows from the start timestep down to 0, if a reference exists
        final_fidelity: Fidelity of the final state against the reference, if any
        start_fidelity: Fidelity of the starting state against the reference, if any
        outputs: Files written
    """

    state: DensityMatrix
    curve: Optional[CurveRows] = None
    final_fidelity: Optional[float] = None
    start_fidelity: Optional[float] = None
    outputs: List[Path] = field(default_factory=list)


@dataclass
class DiffuseOutcome:
    state: Optional[DensityMatrix] = None
    curve: Optional[CurveRows] = None
    outputs: List[Path] = field(default_factory=list)


def run_chain(
    checkpoint: Checkpoint, start: DensityMatrix, reference: Optional[DensityMatrix]
) -> ChainResult:
    """Backward chain of a checkpoint's denoiser from t = T."""
    cfg = checkpoint.cfg
    embed = TimeEmbedConfig(cfg.total_timesteps, cfg.alpha_embed)
    circuit = DenoiserCircuit(checkpoint_theta(checkpoint), embed, cfg.cutoff)
    return circuit.backward_chain(start, cfg.total_timesteps, reference)


class ExperimentService:
    """
    Runs CLI workflows against one output directory.

    Example:
        >>> service = ExperimentService(Path("runs/desk"))
        >>> outcome = service.train_generative(cfg)
        >>> chain = service.generate(outcome.outputs[0])
        >>> print(f"Fidelity: {chain.final_fidelity:.4f}")
    """

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)

    def path(self, name: str) -> Path:
        return self.out_dir / name

    # ------------------------------------------------------------------
    # Training
    # ------------------------------------------------------------------

    def _save_training(
        self,
        role: Role,
        cfg: TrainConfig,
        result: TrainingResult,
        target: Optional[TargetSpec],
    ) -> TrainOutcome:
        checkpoint = make_checkpoint(role, cfg, result.theta, target, result.summary)
        outputs = [
            checkpoint_save(self.path(RC.CHECKPOINT_FILE), checkpoint),
            write_csv(
                self.path(RC.METRICS_FILE),
                TC.METRICS_COLUMNS,
                [row.as_tuple() for row in result.metrics],
            ),
        ]
        return TrainOutcome(result=result, checkpoint=checkpoint, outputs=outputs)

    def train_generative(
        self, cfg: TrainConfig, progress: Optional[ProgressCallback] = None
    ) -> TrainOutcome:
        """
        Train a generative denoiser for the config's target.

        Raises:
            ConfigError: If the config names no target
            CutoffTooSmall: If the target does not fit the cutoff
        """
        spec = cfg.target_spec()
        if spec is None:
            raise ConfigError("Generative training needs a target (set 'target' in the config)")
        target = prepare_target(spec, cfg.cutoff)
        result = train_generative(target, cfg, progress)
        return self._save_training(Role.GENERATIVE, cfg, result, spec)

    def train_restoration(
        self, cfg: TrainConfig, progress: Optional[ProgressCallback] = None
    ) -> TrainOutcome:
        """Train a restoration denoiser on coherent states with amplitude up to s_max."""
        sampler = RestorationSampler(s_max=cfg.s_max, seed=cfg.seed)
        result = train_restoration(sampler, cfg, progress)
        return self._save_training(Role.RESTORATION, cfg, result, None)

    # ------------------------------------------------------------------
    # Chains
    # ------------------------------------------------------------------

    def _save_chain(self, chain: ChainResult, reference: Optional[DensityMatrix]) -> ChainOutcome:
        outputs = [save_state(self.path(RC.STATE_FILE), chain.state)]
        outcome = ChainOutcome(state=chain.state, curve=chain.curve, outputs=outputs)
        if chain.curve is not None and reference is not None:
            outputs.append(write_csv(self.path(RC.CURVE_FILE), RC.CURVE_COLUMNS, chain.curve))
            outcome.start_fidelity = chain.curve[0][1]
            outcome.final_fidelity = chain.curve[-1][1]
        return outcome

    def generate(
        self,
        checkpoint_path: Union[str, Path],
        nbar: Optional[float] = None,
        start_eta: Optional[float] = None,
    ) -> ChainOutcome:
        """
        Run a generative checkpoint from noise at t = T down to t = 0.

        Args:
            checkpoint_path: Generative checkpoint
            nbar: Thermal start/environment occupation; defaults to the trained nbar
            start_eta: Start from the target after one loss channel of this
                transmissivity instead of from the thermal state

        Raises:
            CheckpointFormatError: If the checkpoint is unreadable or not generative
        """
        checkpoint = checkpoint_load(checkpoint_path, Role.GENERATIVE)
        cfg = checkpoint.cfg
        assert checkpoint.target is not None
        target = build_target(checkpoint.target, cfg.cutoff)
        occupation = cfg.nbar if nbar is None else nbar
        if start_eta is None:
            start = thermal_start(occupation, cfg.cutoff)
        else:
            start = corrupt(target, start_eta, Environment(occupation))
        logger.info(
            f"Generating {checkpoint.target.label()} from "
            f"{'thermal noise' if start_eta is None else f'eta={start_eta}'} (nbar={occupation})"
        )
        return self._save_chain(run_chain(checkpoint, start, target), target)

    def restore(
        self,
        checkpoint_path: Union[str, Path],
        state_path: Optional[Union[str, Path]] = None,
        reference_path: Optional[Union[str, Path]] = None,
        s: Optional[float] = None,
        phase: float = 0.0,
        eta_ch: Optional[float] = None,
        nbar: Optional[float] = None,
    ) -> ChainOutcome:
        """
        Restore a corrupted state with a restoration checkpoint.

        Either load the noisy state from ``state_path`` (optionally with a clean
        ``reference_path`` for the curve) or synthesize it: the coherent state
        |s e^{i phase}> sent through a loss channel (eta_ch, nbar).

        Raises:
            ConfigError: If neither or both input forms are given
            StateFormatError: If a state file is malformed or at another cutoff
        """
        checkpoint = checkpoint_load(checkpoint_path, Role.RESTORATION)
        cfg = checkpoint.cfg
        if (state_path is None) == (s is None):
            raise ConfigError("Give either a state file or a synthetic input (s, eta_ch)")

        reference: Optional[DensityMatrix] = None
        if state_path is not None:
            noisy = self._load_at_cutoff(state_path, cfg.cutoff)
            if reference_path is not None:
                reference = self._load_at_cutoff(reference_path, cfg.cutoff)
        else:
            assert s is not None
            if eta_ch is None:
                raise ConfigError("A synthetic input needs a channel transmissivity eta_ch")
            reference = coherent_target(s, phase, cfg.cutoff)
            occupation = cfg.nbar if nbar is None else nbar
            noisy = corrupt(reference, eta_ch, Environment(occupation))
            logger.info(f"Corrupted s={s}, phase={phase:.4f}: eta_ch={eta_ch}, nbar={occupation}")
        return self._save_chain(run_chain(checkpoint, noisy, reference), reference)

    @staticmethod
    def _load_at_cutoff(path: Union[str, Path], cutoff: int) -> DensityMatrix:
        rho = load_state(path)
        if rho.modes != 1 or rho.cutoff != cutoff:
            raise StateFormatError(
                f"State {path} is {rho.modes}-mode at cutoff {rho.cutoff}; the checkpoint "
                f"needs a single-mode state at cutoff {cutoff}"
            )
        return rho

    # ------------------------------------------------------------------
    # Forward process
    # ------------------------------------------------------------------

    def diffuse(
        self, cfg: TrainConfig, t: Optional[int] = None, curve: bool = False
    ) -> DiffuseOutcome:
        """
        Forward-diffuse the config's target.

        Args:
            cfg: Supplies the target, schedule and nbar
            t: Write ρ_t as a state document
            curve: Write F(ρ_0, ρ_t) for t = 0..T

        Raises:
            ConfigError: If the config names no target, or neither t nor curve is requested
        """
        spec = cfg.target_spec()
        if spec is None:
            raise ConfigError("diffuse needs a target (set 'target' in the config)")
        if t is None and not curve:
            raise ConfigError("diffuse needs a timestep or the curve flag")
        target = prepare_target(spec, cfg.cutoff)
        schedule = schedule_for(cfg)
        env = Environment(cfg.nbar)
        outcome = DiffuseOutcome()
        if t is not None:
            outcome.state = diffuse_to(target, t, schedule, env)
            outcome.outputs.append(save_state(self.path(RC.STATE_FILE), outcome.state))
        if curve:
            trajectory = DiffusionTrajectory.build(target, schedule, env)
            outcome.curve = [(step, fidelity(target, rho)) for step, rho in enumerate(trajectory)]
            written = write_csv(self.path(RC.CURVE_FILE), RC.CURVE_COLUMNS, outcome.curve)
            outcome.outputs.append(written)
        return outcome

    def write_schedule(self, cfg: TrainConfig) -> Path:
        """Schedule table (t, eta_t, eta_bar_t) of a config."""
        rows = schedule_rows(schedule_for(cfg))
        return write_csv(self.path(RC.SCHEDULE_FILE), DC.SCHEDULE_CSV_COLUMNS, rows)

    # ------------------------------------------------------------------
    # Manifest
    # ------------------------------------------------------------------

    def write_manifest(
        self,
        command: str,
        started_at: str,
        outputs: Sequence[Path],
        config_path: Optional[Union[str, Path]] = None,
        profile: Optional[str] = None,
        seed: Optional[int] = None,
        parameters: Optional[Dict[str, Any]] = None,
    ) -> Path:
        """Record a finished command and every file it wrote."""
        manifest = RunManifest(
            command=command,
            config_path=None if config_path is None else str(config_path),
            profile=profile,
            seed=seed,
            started_at=started_at,
            finished_at=utc_now(),
            outputs=[str(path) for path in outputs],
            parameters=dict(parameters or {}),
        )
        return write_json(self.path(RC.MANIFEST_FILE), manifest.model_dump(mode="json"))
