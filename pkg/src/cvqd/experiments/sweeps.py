"""
Sweep drivers: generation quality against a target parameter, and restoration
quality against the clean amplitude.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from cvqd.constants import Role, TargetKind
from cvqd.constants import RuntimeConstants as RC
from cvqd.exceptions import ConfigError
from cvqd.experiments.service import run_chain, thermal_start
from cvqd.models.checkpoint import Checkpoint
from cvqd.models.config import TrainConfig
from cvqd.physics.diffusion import Environment, corrupt
from cvqd.physics.fock import fidelity
from cvqd.physics.targets import prepare_target
from cvqd.storage.checkpoints import make_checkpoint
from cvqd.storage.config import build_config
from cvqd.storage.files import write_csv
from cvqd.training.sampling import coherent_target
from cvqd.training.trainer import ProgressCallback, train_generative

logger = logging.getLogger(__name__)

# sweep parameter -> (target kind, config key holding the value)
SWEEP_PARAMETERS: Dict[str, Tuple[TargetKind, str]] = {
    "alpha": (TargetKind.COHERENT, "target_alpha"),
    "r": (TargetKind.SQUEEZED, "target_r"),
}


@dataclass(frozen=True)
class SweepRow:
    """One trained-and-generated point of a parameter sweep."""

    param: float
    nbar: float
    fidelity: float
    iters: int

    def as_tuple(self) -> Tuple[float, float, float, int]:
        return (self.param, self.nbar, self.fidelity, self.iters)


@dataclass(frozen=True)
class RestoreSweepRow:
    s: float
    mean_fidelity: float
    std_fidelity: float
    min_fidelity: float

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.s, self.mean_fidelity, self.std_fidelity, self.min_fidelity)


def sweep_config(cfg: TrainConfig, param: str, value: float, nbar: float) -> TrainConfig:
    """
    Copy of cfg targeting one sweep point, revalidated.

    Raises:
        ConfigError: For an unknown sweep parameter or an invalid value
    """
    if param not in SWEEP_PARAMETERS:
        raise ConfigError(
            f"Unknown sweep parameter '{param}', expected one of {list(SWEEP_PARAMETERS)}"
        )
    kind, key = SWEEP_PARAMETERS[param]
    values = cfg.to_file_dict()
    values.update({"target": kind.value, key: float(value), "nbar": float(nbar)})
    return build_config(values)


def run_sweep(
    param: str,
    values: Sequence[float],
    cfg: TrainConfig,
    nbars: Sequence[float] = (0.0,),
    progress: Optional[Callable[[float, float], ProgressCallback]] = None,
) -> List[SweepRow]:
    """
    Train and generate once per (value, nbar) and record the final fidelity.

    Every target is checked against the cutoff before any training starts.

    Args:
        param: "alpha" (coherent target) or "r" (squeezed vacuum)
        values: Parameter values
        cfg: Base configuration; its target keys are overridden per point
        nbars: Environment occupations to run each value under
        progress: Factory of per-run progress callbacks, called with (value, nbar)

    Raises:
        CutoffTooSmall: If any target does not fit the cutoff
    """
    points = [(value, nbar) for value in values for nbar in nbars]
    configs = [sweep_config(cfg, param, value, nbar) for value, nbar in points]
    targets = []
    for point_cfg in configs:
        spec = point_cfg.target_spec()
        assert spec is not None
        targets.append(prepare_target(spec, point_cfg.cutoff))

    rows = []
    for (value, nbar), point_cfg, target in zip(points, configs, targets):
        logger.info(f"Sweep point {param}={value}, nbar={nbar}")
        callback = progress(value, nbar) if progress is not None else None
        result = train_generative(target, point_cfg, callback)
        checkpoint = make_checkpoint(
            Role.GENERATIVE, point_cfg, result.theta, point_cfg.target_spec(), result.summary
        )
        chain = run_chain(checkpoint, thermal_start(nbar, point_cfg.cutoff), target)
        final = fidelity(target, chain.state)
        iterations = result.summary.iterations if result.summary else len(result.metrics)
        rows.append(SweepRow(param=value, nbar=nbar, fidelity=final, iters=iterations))
        logger.info(f"Sweep point {param}={value}, nbar={nbar}: fidelity {final:.6f}")
    return rows


def sweep_phases(count: int = RC.RESTORE_SWEEP_PHASES) -> List[float]:
    """Phases k·2π/count, k = 0..count−1."""
    return [2.0 * math.pi * k / count for k in range(count)]


def restore_sweep(
    checkpoint: Checkpoint,
    eta_ch: float,
    nbar: float,
    amplitudes: Sequence[float] = RC.RESTORE_SWEEP_AMPLITUDES,
    phases: Optional[Sequence[float]] = None,
) -> Tuple[List[RestoreSweepRow], List[Tuple[float, int, float]]]:
    """
    Restore |s e^{iφ}> for every amplitude and phase after one corruption channel.

    Returns:
        Per-amplitude final-fidelity statistics, and the phase-averaged
        fidelity curve as (s, t, mean fidelity) rows from t = T down to 0
    """
    phases = sweep_phases() if phases is None else list(phases)
    cutoff = checkpoint.cfg.cutoff
    env = Environment(nbar)
    rows: List[RestoreSweepRow] = []
    curves: List[Tuple[float, int, float]] = []
    for s in amplitudes:
        finals = []
        per_phase = []
        for phase in phases:
            clean = coherent_target(s, phase, cutoff)
            chain = run_chain(checkpoint, corrupt(clean, eta_ch, env), clean)
            assert chain.curve is not None
            per_phase.append([value for _, value in chain.curve])
            finals.append(chain.curve[-1][1])
        steps = [t for t, _ in chain.curve]
        means = np.mean(np.array(per_phase), axis=0)
        curves.extend((float(s), t, float(mean)) for t, mean in zip(steps, means))
        final = np.array(finals)
        rows.append(
            RestoreSweepRow(
                s=float(s),
                mean_fidelity=float(final.mean()),
                std_fidelity=float(final.std()),
                min_fidelity=float(final.min()),
            )
        )
        logger.info(f"Restore sweep s={s}: mean fidelity {final.mean():.6f}, {len(phases)} phases")
    return rows, curves


def write_sweep(path: Union[str, Path], rows: Sequence[SweepRow]) -> Path:
    return write_csv(path, RC.SWEEP_COLUMNS, [row.as_tuple() for row in rows])


def write_restore_sweep(
    out_dir: Union[str, Path],
    rows: Sequence[RestoreSweepRow],
    curves: Sequence[Tuple[float, int, float]],
) -> List[Path]:
    out = Path(out_dir)
    return [
        write_csv(
            out / RC.SUMMARY_FILE, RC.RESTORE_SWEEP_COLUMNS, [row.as_tuple() for row in rows]
        ),
        write_csv(out / RC.RESTORE_CURVES_FILE, RC.RESTORE_CURVE_COLUMNS, curves),
    ]
