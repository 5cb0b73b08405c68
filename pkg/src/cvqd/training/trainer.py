"""
Training loops for the generative and restoration regimes.

Both loops share one engine: draw a ``LossBatch``, evaluate loss and gradient
with the configured estimator, record a metrics row, keep the best-loss
parameters and take an Adam step with the decayed learning rate. They differ
only in how a batch is drawn (one fixed target with a precomputed trajectory,
or fresh random coherent targets per term).
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from cvqd.constants import GradMode, ScheduleKind
from cvqd.constants import TrainerConstants as TC
from cvqd.exceptions import NonFiniteMatrix
from cvqd.models.checkpoint import TrainingSummary
from cvqd.models.config import TrainConfig
from cvqd.models.states import DensityMatrix
from cvqd.physics.denoiser import ThetaVector, param_init
from cvqd.physics.diffusion import (
    DiffusionTrajectory,
    Environment,
    NoiseSchedule,
    beta_schedule,
    linear_schedule,
)
from cvqd.physics.targets import check_cutoff
from cvqd.training.gradients import grad_central_fd, grad_spsa, loss_and_grad_analytic
from cvqd.training.losses import (
    LossBatch,
    LossDiagnostics,
    batch_loss_fn,
    build_generative_batch,
    build_restoration_batch,
    evaluate_batch,
)
from cvqd.training.optimizer import AdamState, adam_update, lr_at
from cvqd.training.sampling import RestorationSampler, coherent_target

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricsRow:
    """One line of the metrics log."""

    iteration: int
    lr: float
    loss_total: float
    loss_t0: float
    mean_step_fidelity: float
    mean_trace_penalty: float
    wall_ms: float

    def as_tuple(self) -> Tuple[int, float, float, float, float, float, float]:
        """Values in METRICS_COLUMNS order."""
        return (
            self.iteration,
            self.lr,
            self.loss_total,
            self.loss_t0,
            self.mean_step_fidelity,
            self.mean_trace_penalty,
            self.wall_ms,
        )


@dataclass
class TrainingResult:
    """
    Outcome of a training run.

    Attributes:
        theta: Parameters that produced the lowest loss
        metrics: One row per completed iteration
        summary: Loss/iteration summary stored in checkpoints
        final_theta: Parameters after the last update
    """

    theta: ThetaVector
    metrics: List[MetricsRow] = field(default_factory=list)
    summary: Optional[TrainingSummary] = None
    final_theta: Optional[ThetaVector] = None


ProgressCallback = Callable[[MetricsRow], None]


def schedule_for(cfg: TrainConfig) -> NoiseSchedule:
    """Noise schedule described by a config (explicit η endpoints or a β ramp)."""
    if cfg.schedule is ScheduleKind.BETA:
        return beta_schedule(cfg.beta_start, cfg.beta_end, cfg.total_timesteps)
    return linear_schedule(cfg.eta0, cfg.etaT, cfg.total_timesteps)


def has_converged(losses: List[float], window: int, tol: float) -> bool:
    """|L_i − L_{i−window}| ≤ tol·|L_{i−window}| for the latest loss."""
    if len(losses) <= window:
        return False
    current, past = losses[-1], losses[-1 - window]
    return abs(current - past) <= tol * abs(past)


def _seed_streams(seed: int) -> Tuple[int, np.random.Generator, np.random.Generator]:
    """Independent streams for initialization, batch draws and SPSA directions."""
    init_seq, batch_seq, spsa_seq = np.random.SeedSequence(seed).spawn(3)
    init_seed = int(init_seq.generate_state(1)[0])
    return init_seed, np.random.default_rng(batch_seq), np.random.default_rng(spsa_seq)


def loss_and_grad(
    theta: ThetaVector, batch: LossBatch, cfg: TrainConfig, rng: np.random.Generator
) -> Tuple[LossDiagnostics, np.ndarray]:
    """Loss diagnostics and gradient of one batch with the configured estimator."""
    if cfg.grad_mode is GradMode.ANALYTIC:
        return loss_and_grad_analytic(theta, batch, cfg.workers)
    diagnostics = evaluate_batch(theta, batch, cfg.workers)
    loss_fn = batch_loss_fn(batch, theta.layers)
    if cfg.grad_mode is GradMode.SPSA:
        grad = grad_spsa(loss_fn, theta, cfg.spsa_perturb, rng, cfg.spsa_averages)
    else:
        grad = grad_central_fd(loss_fn, theta, cfg.fd_step, cfg.workers)
    return diagnostics, grad


def _run(
    cfg: TrainConfig,
    next_batch: Callable[[np.random.Generator], LossBatch],
    label: str,
    callback: Optional[ProgressCallback],
) -> TrainingResult:
    init_seed, batch_rng, spsa_rng = _seed_streams(cfg.seed)
    theta = param_init(cfg.layers, cfg.param_init_scale, init_seed)
    adam = AdamState.zeros(theta.values.size)
    metrics: List[MetricsRow] = []
    losses: List[float] = []
    best_theta, best_loss, best_iteration = theta, math.inf, 0
    converged = False
    leak_warned = False

    logger.info(
        f"Training {label}: c={cfg.cutoff}, L={cfg.layers}, T={cfg.total_timesteps}, "
        f"B={cfg.batch_size}, I={cfg.max_iters}, grad={cfg.grad_mode.value}, seed={cfg.seed}"
    )
    for iteration in range(cfg.max_iters):
        started = time.perf_counter()
        batch = next_batch(batch_rng)
        diagnostics, grad = loss_and_grad(theta, batch, cfg, spsa_rng)
        loss = diagnostics.loss_total
        if not math.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise NonFiniteMatrix(f"Non-finite loss or gradient at iteration {iteration}")
        if not leak_warned and math.sqrt(max(diagnostics.penalties)) > TC.TARGET_TAIL_TOL:
            logger.warning(
                f"Predicted states lose up to {math.sqrt(max(diagnostics.penalties)):.2e} of "
                f"their trace at cutoff {cfg.cutoff}"
            )
            leak_warned = True

        lr = lr_at(iteration, cfg.lr0, cfg.decay_steps, cfg.decay_rate)
        if loss < best_loss:
            best_theta, best_loss, best_iteration = theta, loss, iteration
        losses.append(loss)
        values, adam = adam_update(adam, theta.values, grad, lr)
        row = MetricsRow(
            iteration=iteration,
            lr=lr,
            loss_total=loss,
            loss_t0=diagnostics.loss_t0,
            mean_step_fidelity=diagnostics.mean_step_fidelity,
            mean_trace_penalty=diagnostics.mean_trace_penalty,
            wall_ms=(time.perf_counter() - started) * 1000.0,
        )
        metrics.append(row)
        logger.debug(
            f"iter {iteration}: loss={loss:.8g} L0={diagnostics.loss_t0:.8g} lr={lr:.4g} "
            f"timesteps={diagnostics.timesteps[1:]}"
        )
        if callback is not None:
            callback(row)
        if has_converged(losses, cfg.convergence_window, cfg.convergence_tol):
            converged = True
            logger.info(f"Converged at iteration {iteration} (loss {loss:.8g})")
            break
        theta = theta.with_values(values)

    if not converged:
        logger.warning(f"Stopped after {len(metrics)} iterations without meeting convergence")
    summary = TrainingSummary(
        final_loss=losses[-1],
        best_loss=best_loss,
        best_iteration=best_iteration,
        iterations=len(metrics),
        converged=converged,
        initial_loss=losses[0],
    )
    logger.info(
        f"Finished {label}: best loss {best_loss:.8g} at iteration {best_iteration}, "
        f"{len(metrics)} iterations"
    )
    return TrainingResult(theta=best_theta, metrics=metrics, summary=summary, final_theta=theta)


def train_generative(
    target: DensityMatrix, cfg: TrainConfig, callback: Optional[ProgressCallback] = None
) -> TrainingResult:
    """
    Train the denoiser to generate one fixed target from thermal noise.

    The trajectory ρ_0..ρ_T is computed once; every iteration samples B
    timesteps from it plus the always-included t = 1 pair.

    Args:
        target: Clean target state at cfg.cutoff
        cfg: Training configuration
        callback: Called with every metrics row

    Returns:
        TrainingResult with the best-loss parameters

    Raises:
        CutoffTooSmall: If the target is not representable at the cutoff
        ConfigError: If B > T − 1 without replacement
    """
    check_cutoff(target)
    schedule = schedule_for(cfg)
    env = Environment(cfg.nbar)
    trajectory = DiffusionTrajectory.build(target, schedule, env)
    logger.info(f"Diffusion endpoint eta_bar_T={schedule.eta_bar_at(cfg.total_timesteps):.6g}")

    def next_batch(rng: np.random.Generator) -> LossBatch:
        return build_generative_batch(target, schedule, env, cfg, rng, trajectory)

    return _run(cfg, next_batch, "generative", callback)


def train_restoration(
    sampler: RestorationSampler, cfg: TrainConfig, callback: Optional[ProgressCallback] = None
) -> TrainingResult:
    """
    Train the denoiser on freshly drawn coherent states |s e^{iφ}⟩.

    Raises:
        CutoffTooSmall: If the largest sampled amplitude does not fit the cutoff
    """
    check_cutoff(coherent_target(sampler.s_max, 0.0, cfg.cutoff), "Largest restoration target")
    schedule = schedule_for(cfg)
    env = Environment(cfg.nbar)

    def next_batch(rng: np.random.Generator) -> LossBatch:
        return build_restoration_batch(sampler, schedule, env, cfg, rng)

    return _run(cfg, next_batch, "restoration", callback)
