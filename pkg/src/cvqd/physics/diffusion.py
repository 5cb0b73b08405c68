"""
Forward diffusion: noise schedules and the thermal loss channel.

A single diffusion step mixes the state with a thermal environment on a
beamsplitter of transmissivity η and discards the environment. Because a chain
of such channels with a common environment collapses into one channel with the
product transmissivity η̄_t, ``diffuse_to`` jumps to any timestep directly.

The channel is evaluated block by block in total photon number. The
environment input is the thermal state at the system cutoff renormalized to
unit trace, and environment output levels are never truncated; only the
retained system output is cut at c.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Iterator, List, Optional, Sequence, Tuple, cast

import numpy as np

from cvqd.exceptions import ConfigError, InvalidState
from cvqd.models.states import DensityMatrix
from cvqd.physics.fock import thermal_populations
from cvqd.physics.gates import beamsplitter_block, gate_cache

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Environment:
    """Thermal environment mode with mean photon number nbar."""

    nbar: float = 0.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.nbar) or self.nbar < 0:
            raise ConfigError(f"Environment mean photon number must be >= 0, got {self.nbar}")

    def populations(self, cutoff: int) -> np.ndarray:
        """Thermal populations on levels 0..cutoff-1, renormalized to sum 1."""
        probs = thermal_populations(self.nbar, cutoff)
        return probs / probs.sum()


@dataclass(frozen=True)
class NoiseSchedule:
    """
    Per-step transmissivities and their running products.

    Attributes:
        total_timesteps: T
        eta0: Start of the linear ramp
        etaT: End of the linear ramp (eta at t = T)
        eta: eta[t-1] is the transmissivity of step t, t = 1..T
        eta_bar: eta_bar[t] = prod_{i<=t} eta_i, with eta_bar[0] = 1
    """

    total_timesteps: int
    eta0: float
    etaT: float
    eta: np.ndarray = field(repr=False)
    eta_bar: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        eta = np.array(self.eta, dtype=float)
        eta_bar = np.array(self.eta_bar, dtype=float)
        if eta.shape != (self.total_timesteps,) or eta_bar.shape != (self.total_timesteps + 1,):
            raise ConfigError("Schedule arrays do not match the number of timesteps")
        if np.any(eta < 0.0) or np.any(eta > 1.0):
            raise ConfigError("Every transmissivity must lie in [0, 1]")
        if eta_bar[0] != 1.0 or np.any(np.diff(eta_bar) > 0.0):
            raise ConfigError("Cumulative transmissivity must start at 1 and never increase")
        eta.setflags(write=False)
        eta_bar.setflags(write=False)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "eta_bar", eta_bar)

    def eta_at(self, t: int) -> float:
        self._check_step(t, first=1)
        return float(self.eta[t - 1])

    def eta_bar_at(self, t: int) -> float:
        self._check_step(t, first=0)
        return float(self.eta_bar[t])

    def _check_step(self, t: int, first: int) -> None:
        if not first <= t <= self.total_timesteps:
            raise ConfigError(
                f"Timestep {t} outside {first}..{self.total_timesteps} for this schedule"
            )

    def with_eta_bar(self, eta_bar: Sequence[float]) -> "NoiseSchedule":
        """Copy with overridden cumulative products (used for fault injection)."""
        return replace(self, eta_bar=np.asarray(eta_bar, dtype=float))


def linear_schedule(eta0: float, etaT: float, total_timesteps: int) -> NoiseSchedule:
    """
    Linear transmissivity ramp eta_t = eta0 + (etaT - eta0) t / T, t = 1..T.

    Raises:
        ConfigError: If an endpoint is outside [0, 1] or T < 1
    """
    if total_timesteps < 1:
        raise ConfigError(f"Schedule needs at least one timestep, got {total_timesteps}")
    for name, value in (("eta_0", eta0), ("eta_T", etaT)):
        if not 0.0 <= value <= 1.0:
            raise ConfigError(f"{name} must lie in [0, 1], got {value}")
    steps = np.arange(1, total_timesteps + 1, dtype=float)
    eta = eta0 + (etaT - eta0) * steps / total_timesteps
    eta[-1] = etaT
    eta_bar = np.concatenate(([1.0], np.cumprod(eta)))
    logger.debug(
        f"Linear schedule T={total_timesteps} eta {eta0}->{etaT}, final eta_bar {eta_bar[-1]:.6g}"
    )
    return NoiseSchedule(total_timesteps, float(eta0), float(etaT), eta, eta_bar)


def schedule_from_etas(etas: Sequence[float]) -> NoiseSchedule:
    """Schedule with arbitrary per-step transmissivities."""
    eta = np.asarray(etas, dtype=float)
    if eta.ndim != 1 or eta.size < 1:
        raise ConfigError("A schedule needs a non-empty 1-D list of transmissivities")
    eta_bar = np.concatenate(([1.0], np.cumprod(eta)))
    return NoiseSchedule(eta.size, float(eta[0]), float(eta[-1]), eta, eta_bar)


def beta_to_eta(beta_start: float, beta_end: float, total_timesteps: int) -> Tuple[float, float]:
    """
    Map a linear beta ramp onto transmissivity endpoints, eta = 1 - beta.

    The timestep count only fixes the ramp length; the endpoints map pointwise.

    Raises:
        ConfigError: If a beta is outside (0, 1)
    """
    if total_timesteps < 1:
        raise ConfigError(f"Schedule needs at least one timestep, got {total_timesteps}")
    for name, value in (("beta_start", beta_start), ("beta_end", beta_end)):
        if not 0.0 < value < 1.0:
            raise ConfigError(f"{name} must lie in (0, 1), got {value}")
    return 1.0 - beta_start, 1.0 - beta_end


def eta_to_beta(eta0: float, etaT: float) -> Tuple[float, float]:
    """Inverse of ``beta_to_eta``."""
    return 1.0 - eta0, 1.0 - etaT


def beta_schedule(beta_start: float, beta_end: float, total_timesteps: int) -> NoiseSchedule:
    """Schedule built from a linear beta ramp."""
    eta0, etaT = beta_to_eta(beta_start, beta_end, total_timesteps)
    return linear_schedule(eta0, etaT, total_timesteps)


def schedule_rows(schedule: NoiseSchedule) -> List[Tuple[int, Optional[float], float]]:
    """(t, eta_t, eta_bar_t) rows for t = 0..T; eta is None at t = 0."""
    rows: List[Tuple[int, Optional[float], float]] = [(0, None, 1.0)]
    for t in range(1, schedule.total_timesteps + 1):
        rows.append((t, schedule.eta_at(t), schedule.eta_bar_at(t)))
    return rows


# ============================================================================
# Thermal loss channel
# ============================================================================


def _loss_amplitudes(eta: float, cutoff: int) -> np.ndarray:
    """
    amps[j, k, m] = <m, j| U_BS(eta) |m + j - k, k>, system first, environment second.

    Zero where the input level m + j - k falls outside 0..cutoff-1.
    """
    theta = float(np.arccos(np.sqrt(eta)))
    amps = np.zeros((2 * cutoff - 1, cutoff, cutoff), dtype=np.complex128)
    for total in range(2 * cutoff - 1):
        block = beamsplitter_block(theta, 0.0, total)
        # environment levels j (output) and k (input) that leave both system levels < cutoff
        lowest = max(0, total - cutoff + 1)
        env_out = np.arange(lowest, total + 1)
        env_in = np.arange(lowest, min(total, cutoff - 1) + 1)
        amps[env_out[:, None], env_in[None, :], (total - env_out)[:, None]] = block[
            np.ix_(env_out, env_in)
        ]
    amps.setflags(write=False)
    return amps


def loss_amplitudes(eta: float, cutoff: int) -> np.ndarray:
    """Cached ``_loss_amplitudes``."""
    key = ("thermal_loss", float(eta), cutoff)
    return cast(np.ndarray, gate_cache.get_or_build(key, lambda: _loss_amplitudes(eta, cutoff)))


def thermal_loss_step(rho: DensityMatrix, eta: float, env: Environment) -> DensityMatrix:
    """
    One thermal loss channel Tr_E[U_BS(eta)(rho ⊗ rho_th)U_BS†(eta)].

    Args:
        rho: Single-mode input state
        eta: Beamsplitter transmissivity in [0, 1]
        env: Thermal environment

    Returns:
        Output state; its trace falls below the input trace only by the
        population pushed to levels >= cutoff
    """
    if rho.modes != 1:
        raise InvalidState("thermal_loss_step expects a single-mode state")
    if not 0.0 <= eta <= 1.0:
        raise InvalidState(f"Transmissivity must lie in [0, 1], got {eta}")
    c = rho.cutoff
    probs = env.populations(c)
    amps = loss_amplitudes(eta, c)
    out = np.zeros((c, c), dtype=np.complex128)
    for k in range(c):
        if probs[k] == 0.0:
            continue
        for j in range(2 * c - 1):
            shift = j - k
            lo, hi = max(0, -shift), min(c, c - shift)
            if lo >= hi:
                continue
            column = amps[j, k, lo:hi]
            block = rho.data[lo + shift : hi + shift, lo + shift : hi + shift]
            out[lo:hi, lo:hi] += probs[k] * np.outer(column, column.conj()) * block
    return rho.with_data(0.5 * (out + out.conj().T))


def diffuse_to(
    rho0: DensityMatrix, t: int, schedule: NoiseSchedule, env: Environment
) -> DensityMatrix:
    """
    Jump straight to timestep t with one channel of transmissivity eta_bar_t.

    t = 0 returns the input unchanged.
    """
    eta_bar = schedule.eta_bar_at(t)
    if t == 0:
        return rho0
    return thermal_loss_step(rho0, eta_bar, env)


def corrupt(rho_in: DensityMatrix, eta_ch: float, env: Environment) -> DensityMatrix:
    """Noisy transmission channel applied to a state before restoration."""
    return thermal_loss_step(rho_in, eta_ch, env)


@dataclass(frozen=True)
class DiffusionTrajectory:
    """Every diffused state rho_t, t = 0..T, of one target."""

    states: Tuple[DensityMatrix, ...]

    @classmethod
    def build(
        cls, rho0: DensityMatrix, schedule: NoiseSchedule, env: Environment
    ) -> "DiffusionTrajectory":
        states = tuple(
            diffuse_to(rho0, t, schedule, env) for t in range(schedule.total_timesteps + 1)
        )
        return cls(states)

    def __getitem__(self, t: int) -> DensityMatrix:
        return self.states[t]

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[DensityMatrix]:
        return iter(self.states)
