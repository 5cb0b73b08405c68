"""
Learnable backward process: time embedding, the two-qumode CVQNN unitary and
the denoising channel.

One denoise step prepares the embedding state τ_t in slot A, places the noisy
state in slot B, applies U(ϑ) and keeps slot A:

    ρ̃_{t−1} = tr_B[U(ϑ)(τ_t ⊗ ρ_t)U(ϑ)†]

Keeping the embedding slot means the circuit cannot fall back to copying its
input. A single parameter vector ϑ is shared by every timestep; only τ_t
changes along the chain.

Layer layout (16 parameters, applied left to right):
BS1(θ, φ) → R_A⊗R_B → S_A⊗S_B → BS2(θ, φ) → R2_A⊗R2_B → D_A⊗D_B → K_A⊗K_B
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from cvqd.constants import DenoiserConstants as DNC
from cvqd.constants import GateConstants as GC
from cvqd.constants import GeneratorKind
from cvqd.exceptions import ConfigError, InvalidState
from cvqd.models.states import DensityMatrix
from cvqd.physics.fock import density_factor, fidelity, ladder_ops
from cvqd.physics.gates import (
    GateMatrix,
    beamsplitter_by_angle,
    displacement,
    gate_cache,
    gate_derivative,
    kerr,
    rotation,
    squeeze,
    vacuum_orbit,
)

logger = logging.getLogger(__name__)


# ============================================================================
# Parameters and embedding configuration
# ============================================================================


@dataclass(frozen=True)
class ThetaVector:
    """
    Flat parameter vector of an L-layer denoiser.

    Attributes:
        values: Real vector of length 16·L in the per-layer layout above
        layers: Number of layers L
    """

    values: np.ndarray
    layers: int

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if self.layers < 1:
            raise ConfigError(f"Denoiser needs at least one layer, got {self.layers}")
        expected = DNC.PARAMS_PER_LAYER * self.layers
        if values.shape != (expected,):
            raise ConfigError(
                f"Parameter vector for {self.layers} layers must have length {expected}, "
                f"got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            raise ConfigError("Parameter vector contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, layers: int) -> "ThetaVector":
        return cls(np.zeros(DNC.PARAMS_PER_LAYER * layers), layers)

    def layer(self, index: int) -> np.ndarray:
        start = DNC.PARAMS_PER_LAYER * index
        return self.values[start : start + DNC.PARAMS_PER_LAYER]

    def with_values(self, values: np.ndarray) -> "ThetaVector":
        return ThetaVector(values, self.layers)


@dataclass(frozen=True)
class TimeEmbedConfig:
    """
    Embedding-mode settings.

    Attributes:
        total_timesteps: T, the phase of step t is tπ/T
        alpha_embed: Real displacement of the embedding coherent state
    """

    total_timesteps: int
    alpha_embed: float = DNC.DEFAULT_ALPHA_EMBED

    def __post_init__(self) -> None:
        if self.alpha_embed <= 0:
            raise ConfigError(f"alpha_embed must be positive, got {self.alpha_embed}")
        if self.total_timesteps < 1:
            raise ConfigError(f"total_timesteps must be >= 1, got {self.total_timesteps}")


def embedding_phase(t: int, cfg: TimeEmbedConfig) -> float:
    """Phase angle tπ/T of timestep t."""
    return t * math.pi / cfg.total_timesteps


def time_embed(t: int, cfg: TimeEmbedConfig, cutoff: int) -> DensityMatrix:
    """
    Embedding state τ_t = R(tπ/T) D(α)|0⟩⟨0| D† R†.

    Raises:
        ConfigError: If t is outside 0..T
    """
    if not 0 <= t <= cfg.total_timesteps:
        raise ConfigError(f"Timestep {t} outside 0..{cfg.total_timesteps}")
    key = ("tau", t, cfg.total_timesteps, cfg.alpha_embed, cutoff)

    def build() -> DensityMatrix:
        ket = vacuum_orbit(
            [displacement(cfg.alpha_embed, cutoff), rotation(embedding_phase(t, cfg), cutoff)],
            cutoff,
        )
        return ket.to_density()

    state = gate_cache.get_or_build(key, build)
    assert isinstance(state, DensityMatrix)
    return state


# ============================================================================
# Circuit factors
# ============================================================================


@dataclass
class CircuitFactor:
    """
    One gate factor of the circuit with optional parameter derivatives.

    Attributes:
        matrix: Two-mode matrix of the factor
        derivatives: (global parameter index, d matrix / d parameter) pairs
    """

    matrix: np.ndarray
    derivatives: List[Tuple[int, np.ndarray]] = field(default_factory=list)


def _clamp_squeeze(r: float) -> Tuple[float, float]:
    """Clamped squeezing and the derivative scale of the clamp (0 at or past the boundary)."""
    if abs(r) >= GC.SQUEEZE_CLAMP:
        return math.copysign(GC.SQUEEZE_CLAMP, r), 0.0
    return r, 1.0


def _beamsplitter_factor(
    theta: float, phi: float, cutoff: int, index: int, with_derivatives: bool
) -> CircuitFactor:
    if not with_derivatives:
        return CircuitFactor(beamsplitter_by_angle(theta, phi, cutoff).data)
    unitary, d_theta = gate_derivative(GeneratorKind.BS_THETA, (theta, phi), cutoff)
    _, d_phi = gate_derivative(GeneratorKind.BS_PHI, (theta, phi), cutoff)
    return CircuitFactor(unitary, [(index, d_theta), (index + 1, d_phi)])


def _pair_factor(
    gate_a: np.ndarray,
    gate_b: np.ndarray,
    derivs_a: Sequence[Tuple[int, np.ndarray]],
    derivs_b: Sequence[Tuple[int, np.ndarray]],
) -> CircuitFactor:
    """Factor gate_a ⊗ gate_b with derivatives lifted into the two-mode space."""
    factor = CircuitFactor(np.kron(gate_a, gate_b))
    factor.derivatives.extend((i, np.kron(d, gate_b)) for i, d in derivs_a)
    factor.derivatives.extend((i, np.kron(gate_a, d)) for i, d in derivs_b)
    return factor


def _diagonal_pair(
    builder: Callable[[float, int], GateMatrix],
    generator: np.ndarray,
    values: Tuple[float, float],
    cutoff: int,
    index: int,
    with_derivatives: bool,
) -> CircuitFactor:
    gate_a = builder(values[0], cutoff).data
    gate_b = builder(values[1], cutoff).data
    if not with_derivatives:
        return CircuitFactor(np.kron(gate_a, gate_b))
    return _pair_factor(
        gate_a, gate_b, [(index, generator @ gate_a)], [(index + 1, generator @ gate_b)]
    )


def _squeeze_pair(
    values: Tuple[float, float], cutoff: int, index: int, with_derivatives: bool
) -> CircuitFactor:
    (r_a, scale_a), (r_b, scale_b) = _clamp_squeeze(values[0]), _clamp_squeeze(values[1])
    if not with_derivatives:
        return CircuitFactor(np.kron(squeeze(r_a, cutoff).data, squeeze(r_b, cutoff).data))
    gate_a, d_a = gate_derivative(GeneratorKind.S, r_a, cutoff)
    gate_b, d_b = gate_derivative(GeneratorKind.S, r_b, cutoff)
    return _pair_factor(gate_a, gate_b, [(index, scale_a * d_a)], [(index + 1, scale_b * d_b)])


def _displacement_pair(
    values: Sequence[float], cutoff: int, index: int, with_derivatives: bool
) -> CircuitFactor:
    alpha_a = complex(values[0], values[1])
    alpha_b = complex(values[2], values[3])
    if not with_derivatives:
        return CircuitFactor(
            np.kron(displacement(alpha_a, cutoff).data, displacement(alpha_b, cutoff).data)
        )
    derivs = []
    gates = []
    for offset, alpha in ((0, alpha_a), (2, alpha_b)):
        pair = (alpha.real, alpha.imag)
        gate, d_re = gate_derivative(GeneratorKind.D_RE, pair, cutoff)
        _, d_im = gate_derivative(GeneratorKind.D_IM, pair, cutoff)
        gates.append(gate)
        derivs.append([(index + offset, d_re), (index + offset + 1, d_im)])
    return _pair_factor(gates[0], gates[1], derivs[0], derivs[1])


def layer_factors(
    params: Sequence[float], cutoff: int, offset: int = 0, with_derivatives: bool = False
) -> List[CircuitFactor]:
    """
    The seven factors of one layer in application order.

    Args:
        params: 16 layer parameters
        cutoff: Fock levels per mode
        offset: Global index of params[0] (for derivative bookkeeping)
        with_derivatives: Also build d factor / d parameter matrices
    """
    p = np.asarray(params, dtype=float)
    if p.shape != (DNC.PARAMS_PER_LAYER,) or not np.all(np.isfinite(p)):
        raise ConfigError(f"A layer needs {DNC.PARAMS_PER_LAYER} finite parameters")
    ops = ladder_ops(cutoff)
    rotation_gen = 1j * ops.number
    kerr_gen = 1j * (ops.number @ ops.number)
    d = with_derivatives
    bs1 = _beamsplitter_factor(p[DNC.BS1_THETA], p[DNC.BS1_PHI], cutoff, offset + DNC.BS1_THETA, d)
    rot1 = _diagonal_pair(
        rotation, rotation_gen, (p[DNC.R_A], p[DNC.R_B]), cutoff, offset + DNC.R_A, d
    )
    sq = _squeeze_pair((p[DNC.S_A], p[DNC.S_B]), cutoff, offset + DNC.S_A, d)
    bs2 = _beamsplitter_factor(p[DNC.BS2_THETA], p[DNC.BS2_PHI], cutoff, offset + DNC.BS2_THETA, d)
    rot2 = _diagonal_pair(
        rotation, rotation_gen, (p[DNC.R2_A], p[DNC.R2_B]), cutoff, offset + DNC.R2_A, d
    )
    disp = _displacement_pair(p[DNC.D_A_RE : DNC.D_B_IM + 1], cutoff, offset + DNC.D_A_RE, d)
    nonlinear = _diagonal_pair(
        kerr, kerr_gen, (p[DNC.K_A], p[DNC.K_B]), cutoff, offset + DNC.K_A, d
    )
    return [bs1, rot1, sq, bs2, rot2, disp, nonlinear]


def circuit_factors(
    theta: ThetaVector, cutoff: int, with_derivatives: bool = False
) -> List[CircuitFactor]:
    """All factors of the circuit, layer 1 first."""
    factors: List[CircuitFactor] = []
    for layer in range(theta.layers):
        factors.extend(
            layer_factors(
                theta.layer(layer), cutoff, DNC.PARAMS_PER_LAYER * layer, with_derivatives
            )
        )
    return factors


def _product(factors: Sequence[CircuitFactor], cutoff: int) -> np.ndarray:
    unitary = np.eye(cutoff * cutoff, dtype=np.complex128)
    for factor in factors:
        unitary = factor.matrix @ unitary
    return unitary


def layer_unitary(params: Sequence[float], cutoff: int) -> GateMatrix:
    """Unitary of one layer."""
    return GateMatrix(_product(layer_factors(params, cutoff), cutoff), cutoff, arity=2)


def denoiser_unitary(theta: ThetaVector, cutoff: int) -> GateMatrix:
    """U(ϑ) = U_L ··· U_1, layer 1 applied first."""
    unitary = np.eye(cutoff * cutoff, dtype=np.complex128)
    for layer in range(theta.layers):
        unitary = layer_unitary(theta.layer(layer), cutoff).data @ unitary
    return GateMatrix(unitary, cutoff, arity=2)


# ============================================================================
# Denoising channel
# ============================================================================


def embedded_channel(
    unitary: np.ndarray, tau: DensityMatrix, rho: DensityMatrix
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Apply U to τ ⊗ ρ and keep slot A.

    Returns:
        (reduced output matrix, two-mode input τ ⊗ ρ)
    """
    c = rho.cutoff
    joint = np.kron(tau.data, rho.data)
    evolved = unitary @ joint @ unitary.conj().T
    reduced = np.einsum("ijkj->ik", evolved.reshape(c, c, c, c))
    return 0.5 * (reduced + reduced.conj().T), joint


def embedded_factor(
    unitary: np.ndarray, tau: DensityMatrix, rho: DensityMatrix
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Factor form of embedded_channel: A with tr_B[U(τ ⊗ ρ)U†] = A A†.

    With Y a factor of τ ⊗ ρ, column b·k + j of A is row block b of the
    j-th column of U Y, so A is smooth in U.

    Returns:
        (A of shape (c, c·k), input factor Y of shape (c², k))
    """
    c = rho.cutoff
    joint = np.kron(density_factor(tau), density_factor(rho))
    evolved = unitary @ joint
    return evolved.reshape(c, c * joint.shape[1]), joint


@dataclass
class ChainResult:
    """
    Output of a backward chain.

    Attributes:
        state: Final state ρ̃_0
        curve: (t, fidelity vs reference) rows from t_start down to 0, or None
    """

    state: DensityMatrix
    curve: Optional[List[Tuple[int, float]]] = None


class DenoiserCircuit:
    """
    A denoiser with fixed parameters, its unitary built once and reused.

    Example:
        >>> circuit = DenoiserCircuit(ThetaVector.zeros(2), TimeEmbedConfig(30), cutoff=8)
        >>> out = circuit.denoise_step(make_vacuum(8), t=5)
    """

    def __init__(self, theta: ThetaVector, embed: TimeEmbedConfig, cutoff: int) -> None:
        self.theta = theta
        self.embed = embed
        self.cutoff = cutoff

    @cached_property
    def unitary(self) -> np.ndarray:
        logger.debug(f"Building denoiser unitary: L={self.theta.layers}, c={self.cutoff}")
        return denoiser_unitary(self.theta, self.cutoff).data

    def denoise_step(self, rho_t: DensityMatrix, t: int) -> DensityMatrix:
        """ρ̃_{t−1} from ρ_t."""
        if rho_t.modes != 1 or rho_t.cutoff != self.cutoff:
            raise InvalidState(
                f"Denoiser at cutoff {self.cutoff} expects a single-mode state at that cutoff"
            )
        if not 1 <= t <= self.embed.total_timesteps:
            raise ConfigError(f"Denoise timestep {t} outside 1..{self.embed.total_timesteps}")
        tau = time_embed(t, self.embed, self.cutoff)
        reduced, _ = embedded_channel(self.unitary, tau, rho_t)
        return DensityMatrix(reduced, self.cutoff)

    def prediction_factor(self, rho_t: DensityMatrix, t: int) -> np.ndarray:
        """Factor A of ρ̃_{t−1} = A A†; the form the training loss is evaluated on."""
        if rho_t.modes != 1 or rho_t.cutoff != self.cutoff:
            raise InvalidState(
                f"Denoiser at cutoff {self.cutoff} expects a single-mode state at that cutoff"
            )
        tau = time_embed(t, self.embed, self.cutoff)
        factor, _ = embedded_factor(self.unitary, tau, rho_t)
        return factor

    def backward_chain(
        self,
        rho_start: DensityMatrix,
        t_start: int,
        reference: Optional[DensityMatrix] = None,
    ) -> ChainResult:
        """
        Denoise from t_start down to 0, each step consuming the previous output.

        Args:
            rho_start: State at t_start (thermal noise or a corrupted input)
            t_start: First timestep to denoise, 1..T
            reference: When given, record the fidelity of every intermediate
                state against it
        """
        if not 1 <= t_start <= self.embed.total_timesteps:
            raise ConfigError(f"Chain start {t_start} outside 1..{self.embed.total_timesteps}")
        curve: Optional[List[Tuple[int, float]]] = None
        if reference is not None:
            curve = [(t_start, fidelity(reference, rho_start))]
        state = rho_start
        for t in range(t_start, 0, -1):
            state = self.denoise_step(state, t)
            if curve is not None and reference is not None:
                curve.append((t - 1, fidelity(reference, state)))
        return ChainResult(state=state, curve=curve)


def denoise_step(
    rho_t: DensityMatrix, t: int, theta: ThetaVector, cfg: TimeEmbedConfig, cutoff: int
) -> DensityMatrix:
    """One denoising step with a freshly built circuit."""
    return DenoiserCircuit(theta, cfg, cutoff).denoise_step(rho_t, t)


def backward_chain(
    rho_start: DensityMatrix,
    t_start: int,
    theta: ThetaVector,
    cfg: TimeEmbedConfig,
    cutoff: int,
    reference: Optional[DensityMatrix] = None,
) -> ChainResult:
    """Full backward chain; the unitary is built once for all steps."""
    return DenoiserCircuit(theta, cfg, cutoff).backward_chain(rho_start, t_start, reference)


def param_init(layers: int, scale: float, seed: int) -> ThetaVector:
    """
    Small uniform random parameters in [-scale, scale], deterministic under seed.

    Raises:
        ConfigError: If scale is negative
    """
    if scale < 0:
        raise ConfigError(f"Initialization scale must be >= 0, got {scale}")
    rng = np.random.default_rng(seed)
    values = rng.uniform(-scale, scale, DNC.PARAMS_PER_LAYER * layers)
    return ThetaVector(values, layers)
