"""
Random draws of the training loops: batch timesteps and restoration targets.

Every draw goes through a ``numpy.random.Generator`` owned by the caller, so a
run is reproducible from its seed.
"""

import logging
import math
from typing import List, Tuple

import numpy as np

from cvqd.constants import TrainerConstants as TC
from cvqd.exceptions import ConfigError
from cvqd.models.states import DensityMatrix
from cvqd.physics.fock import make_coherent

logger = logging.getLogger(__name__)


def sample_timesteps(
    batch_size: int, total_timesteps: int, rng: np.random.Generator, replace: bool = False
) -> List[int]:
    """
    Draw batch timesteps uniformly from {2, ..., T}.

    Args:
        batch_size: B
        total_timesteps: T
        rng: Random generator
        replace: Allow repeated timesteps

    Raises:
        ConfigError: If B > T - 1 without replacement, or B < 1
    """
    available = total_timesteps - 1
    if batch_size < 1:
        raise ConfigError(f"Batch size must be >= 1, got {batch_size}")
    if available < 1:
        raise ConfigError(f"Need T >= 2 to sample timesteps, got T={total_timesteps}")
    if not replace and batch_size > available:
        raise ConfigError(
            f"Cannot draw {batch_size} distinct timesteps from {{2..{total_timesteps}}}"
        )
    draws = rng.choice(available, size=batch_size, replace=replace) + 2
    return [int(t) for t in draws]


class RestorationSampler:
    """
    Random coherent targets R(φ)D(s)|0⟩ with s ∈ [0, s_max], φ ∈ [0, 2π).

    Example:
        >>> sampler = RestorationSampler(s_max=1.0, seed=7)
        >>> rho = sampler.sample(cutoff=8)
    """

    def __init__(
        self,
        s_max: float = TC.DEFAULT_S_MAX,
        seed: int = 0,
        phase_range: Tuple[float, float] = (0.0, 2.0 * math.pi),
    ) -> None:
        if s_max < 0 or not math.isfinite(s_max):
            raise ConfigError(f"s_max must be a finite value >= 0, got {s_max}")
        if not phase_range[0] < phase_range[1]:
            raise ConfigError(f"Empty phase range {phase_range}")
        self.s_max = float(s_max)
        self.seed = seed
        self.phase_range = phase_range
        self.rng = np.random.default_rng(seed)

    def draw(self) -> Tuple[float, float]:
        """Next (s, φ) pair."""
        s = float(self.rng.uniform(0.0, self.s_max)) if self.s_max > 0 else 0.0
        phase = float(self.rng.uniform(*self.phase_range))
        return s, phase

    def sample(self, cutoff: int) -> DensityMatrix:
        """Next target as a density matrix."""
        s, phase = self.draw()
        return coherent_target(s, phase, cutoff)


def coherent_target(s: float, phase: float, cutoff: int) -> DensityMatrix:
    """|s e^{iφ}⟩⟨s e^{iφ}|, the state R(φ)D(s)|0⟩."""
    return make_coherent(s * np.exp(1j * phase), cutoff).to_density()
