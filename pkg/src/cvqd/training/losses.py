"""
Training losses.

An iteration is evaluated from a fixed plan, a ``LossBatch``: the t = 1 pair
with weight 1 plus B sampled-timestep pairs with weight λ/B. Each pair holds
the noisy input ρ_t and the reference ρ_{t−1}; both come from direct jumps of
the clean state, never from stepping ρ_t backward. Loss values, finite
differences, SPSA and the analytic gradient all read the same plan, so they
agree on which timesteps an iteration uses.

    L_total = L_0 + (λ/B) Σ_t [1 − F(ρ_{t−1}, ρ̃_{t−1}) + γ (tr ρ̃_{t−1} − 1)²]
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from cvqd.exceptions import InvalidState
from cvqd.models.config import TrainConfig
from cvqd.models.states import DensityMatrix
from cvqd.physics.denoiser import DenoiserCircuit, ThetaVector, TimeEmbedConfig
from cvqd.physics.diffusion import (
    DiffusionTrajectory,
    Environment,
    NoiseSchedule,
    diffuse_to,
)
from cvqd.physics.fock import factor_fidelity, reference_fidelity
from cvqd.training.sampling import RestorationSampler, sample_timesteps

logger = logging.getLogger(__name__)


def trace_penalty(rho: DensityMatrix) -> float:
    """(tr ρ − 1)²."""
    return float((rho.trace - 1.0) ** 2)


def factor_trace(factor: np.ndarray) -> float:
    """tr(A A†), the squared Frobenius norm of A."""
    return float(np.real(np.vdot(factor, factor)))


def step_loss(rho_prev: DensityMatrix, rho_pred: DensityMatrix, gamma: float) -> float:
    """
    Per-step loss 1 − F(ρ_{t−1}, ρ̃_{t−1}) + γ·P(ρ̃_{t−1}).

    Raises:
        InvalidState: If the states have different shapes
    """
    if rho_prev.data.shape != rho_pred.data.shape:
        raise InvalidState(
            f"Loss pair shapes differ: {rho_prev.data.shape} vs {rho_pred.data.shape}"
        )
    return 1.0 - reference_fidelity(rho_prev, rho_pred) + gamma * trace_penalty(rho_pred)


@dataclass(frozen=True)
class LossTerm:
    """
    One supervised pair of the loss.

    Attributes:
        t: Timestep denoised (the circuit maps ρ_t to a prediction of ρ_{t−1})
        rho_in: Noisy input ρ_t
        reference: Clean-side reference ρ_{t−1}
        weight: Contribution weight (1 for the t = 1 term, λ/B otherwise)
    """

    t: int
    rho_in: DensityMatrix
    reference: DensityMatrix
    weight: float


@dataclass(frozen=True)
class LossBatch:
    """Evaluation plan of one training iteration."""

    terms: Tuple[LossTerm, ...]
    gamma: float
    embed: TimeEmbedConfig
    cutoff: int

    @property
    def timesteps(self) -> List[int]:
        return [term.t for term in self.terms]


@dataclass
class LossDiagnostics:
    """
    Loss of one batch and its per-term breakdown.

    Attributes:
        loss_total: Weighted sum of the term losses
        loss_t0: Unweighted loss of the t = 1 term
        fidelities: Fidelity of each term's prediction, in plan order
        penalties: Trace penalty of each term's prediction
        timesteps: Timestep of each term
    """

    loss_total: float
    loss_t0: float
    fidelities: List[float] = field(default_factory=list)
    penalties: List[float] = field(default_factory=list)
    timesteps: List[int] = field(default_factory=list)

    @property
    def mean_step_fidelity(self) -> float:
        return float(np.mean(self.fidelities)) if self.fidelities else 0.0

    @property
    def mean_trace_penalty(self) -> float:
        return float(np.mean(self.penalties)) if self.penalties else 0.0


def _pairs(
    t: int,
    rho0: DensityMatrix,
    schedule: NoiseSchedule,
    env: Environment,
    trajectory: Optional[DiffusionTrajectory],
) -> Tuple[DensityMatrix, DensityMatrix]:
    if trajectory is not None:
        return trajectory[t], trajectory[t - 1]
    return diffuse_to(rho0, t, schedule, env), diffuse_to(rho0, t - 1, schedule, env)


def build_generative_batch(
    rho0: DensityMatrix,
    schedule: NoiseSchedule,
    env: Environment,
    cfg: TrainConfig,
    rng: np.random.Generator,
    trajectory: Optional[DiffusionTrajectory] = None,
) -> LossBatch:
    """
    Plan of one generative iteration: the t = 1 pair plus B sampled timesteps.

    Args:
        rho0: Clean target
        schedule: Noise schedule
        env: Thermal environment
        cfg: Training configuration (B, λ, γ, T, embedding)
        rng: Source of the timestep draw
        trajectory: Precomputed ρ_t for every t; diffused on demand when None
    """
    rho_1, rho_0 = _pairs(1, rho0, schedule, env, trajectory)
    terms = [LossTerm(1, rho_1, rho_0, 1.0)]
    weight = cfg.lambda_ / cfg.batch_size
    for t in sample_timesteps(
        cfg.batch_size, cfg.total_timesteps, rng, replace=cfg.sample_with_replacement
    ):
        rho_t, rho_prev = _pairs(t, rho0, schedule, env, trajectory)
        terms.append(LossTerm(t, rho_t, rho_prev, weight))
    return LossBatch(tuple(terms), cfg.gamma, _embed(cfg), cfg.cutoff)


def build_restoration_batch(
    sampler: RestorationSampler,
    schedule: NoiseSchedule,
    env: Environment,
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> LossBatch:
    """
    Plan of one restoration iteration, one freshly drawn coherent target per term.

    The t = 1 term and every sampled timestep use their own target |β⟩, so an
    iteration sees B + 1 distinct clean states.
    """
    target = sampler.sample(cfg.cutoff)
    terms = [LossTerm(1, diffuse_to(target, 1, schedule, env), target, 1.0)]
    weight = cfg.lambda_ / cfg.batch_size
    for t in sample_timesteps(
        cfg.batch_size, cfg.total_timesteps, rng, replace=cfg.sample_with_replacement
    ):
        target = sampler.sample(cfg.cutoff)
        rho_t = diffuse_to(target, t, schedule, env)
        rho_prev = diffuse_to(target, t - 1, schedule, env)
        terms.append(LossTerm(t, rho_t, rho_prev, weight))
    return LossBatch(tuple(terms), cfg.gamma, _embed(cfg), cfg.cutoff)


def _embed(cfg: TrainConfig) -> TimeEmbedConfig:
    return TimeEmbedConfig(cfg.total_timesteps, cfg.alpha_embed)


def map_ordered(fn: Callable, items: List, workers: int) -> List:
    """Map in submission order, on threads when workers > 1."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def summarize_terms(batch: LossBatch, results: List[Tuple[float, float]]) -> LossDiagnostics:
    """Combine per-term (fidelity, penalty) pairs into the weighted batch loss, in plan order."""
    fidelities = [f for f, _ in results]
    penalties = [p for _, p in results]
    term_losses = [1.0 - f + batch.gamma * p for f, p in results]
    total = 0.0
    for term, value in zip(batch.terms, term_losses):
        total += term.weight * value
    return LossDiagnostics(
        loss_total=total,
        loss_t0=term_losses[0],
        fidelities=fidelities,
        penalties=penalties,
        timesteps=batch.timesteps,
    )


def evaluate_batch(theta: ThetaVector, batch: LossBatch, workers: int = 1) -> LossDiagnostics:
    """
    Loss of a fixed plan under parameters theta.

    Each prediction is kept as its factor A (ρ̃ = A A†) and scored with
    factor_fidelity. Term results are reduced in plan order, so the value is
    bitwise identical for any worker count.
    """
    circuit = DenoiserCircuit(theta, batch.embed, batch.cutoff)
    _ = circuit.unitary  # build once before fanning out to threads

    def evaluate(term: LossTerm) -> Tuple[float, float]:
        factor = circuit.prediction_factor(term.rho_in, term.t)
        return factor_fidelity(term.reference, factor), (factor_trace(factor) - 1.0) ** 2

    return summarize_terms(batch, map_ordered(evaluate, list(batch.terms), workers))


def batch_loss_fn(batch: LossBatch, layers: int, workers: int = 1) -> Callable[[np.ndarray], float]:
    """Scalar loss of a fixed plan as a function of the raw parameter vector."""

    def loss(values: np.ndarray) -> float:
        return evaluate_batch(ThetaVector(values, layers), batch, workers).loss_total

    return loss


def total_loss(
    theta: ThetaVector,
    rho0: DensityMatrix,
    schedule: NoiseSchedule,
    env: Environment,
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> Tuple[float, LossDiagnostics]:
    """
    L_total for one freshly sampled generative batch.

    Raises:
        ConfigError: If B > T − 1 without replacement
    """
    batch = build_generative_batch(rho0, schedule, env, cfg, rng)
    diagnostics = evaluate_batch(theta, batch, cfg.workers)
    return diagnostics.loss_total, diagnostics
