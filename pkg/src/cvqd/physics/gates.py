"""
Truncated-Fock gate matrices for displacement, rotation, squeezing,
beamsplitter and Kerr gates.

Every non-diagonal gate is built by exponentiating its truncated generator,
so one code path governs truncation behavior; closed-form matrix elements are
only used as test oracles. Diagonal gates (rotation, Kerr) are exact at every
cutoff.

Beamsplitter convention: U = expm(θ(e^{iφ} a b† − e^{−iφ} a† b)), η = cos²θ,
with U a U† = √η a + √(1−η) b and U b U† = −√(1−η) a + √η b.
"""

import logging
import threading
from dataclasses import dataclass
from typing import Callable, Dict, Hashable, List, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from cvqd.constants import GateConstants as GC
from cvqd.constants import GeneratorKind, Mode
from cvqd.exceptions import InvalidState, NonFiniteMatrix
from cvqd.models.states import DensityMatrix, Ket
from cvqd.physics.fock import LadderOps, ladder_ops

logger = logging.getLogger(__name__)

__all__ = [
    "GateMatrix",
    "GateCache",
    "LadderOps",
    "ladder_ops",
    "expm",
    "displacement",
    "rotation",
    "squeeze",
    "beamsplitter_by_angle",
    "beamsplitter_by_transmissivity",
    "beamsplitter_block",
    "kerr",
    "embed_single_mode",
    "conjugate",
    "apply_to_ket",
    "gate_exponent",
    "gate_generator",
    "gate_derivative",
    "gate_cache",
    "vacuum_orbit",
]


@dataclass(frozen=True)
class GateMatrix:
    """
    Operator on the truncated one- or two-mode Hilbert space.

    Attributes:
        data: Complex matrix of dimension cutoff**arity
        cutoff: Fock levels per mode
        arity: Number of modes acted on (1 or 2)
    """

    data: np.ndarray
    cutoff: int
    arity: int = 1

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=np.complex128)
        dim = self.cutoff**self.arity
        if data.shape != (dim, dim):
            raise InvalidState(f"Gate of arity {self.arity} must be {dim}x{dim}, got {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    def column_norms(self) -> np.ndarray:
        return np.linalg.norm(self.data, axis=0)

    def __matmul__(self, other: "GateMatrix") -> "GateMatrix":
        if (self.cutoff, self.arity) != (other.cutoff, other.arity):
            raise InvalidState("Cannot compose gates on different spaces")
        return GateMatrix(self.data @ other.data, self.cutoff, self.arity)


class GateCache:
    """
    Thread-safe memo of gate-derived matrices keyed by (kind, params, cutoff).

    Reads are plain dictionary lookups; builders run outside the lock and the
    first writer wins, so concurrent builders of one key agree on one value.
    """

    def __init__(self, max_entries: int = GC.GATE_CACHE_MAX_ENTRIES) -> None:
        self._entries: Dict[Hashable, object] = {}
        self._lock = threading.Lock()
        self._max_entries = max_entries

    def get_or_build(self, key: Hashable, builder: Callable[[], object]) -> object:
        value = self._entries.get(key)
        if value is not None:
            return value
        built = builder()
        with self._lock:
            existing = self._entries.get(key)
            if existing is not None:
                return existing
            if len(self._entries) >= self._max_entries:
                self._entries.pop(next(iter(self._entries)))
            self._entries[key] = built
        return built

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()

    def __len__(self) -> int:
        return len(self._entries)


gate_cache = GateCache()


# ============================================================================
# Matrix exponential
# ============================================================================


def expm(matrix: np.ndarray) -> np.ndarray:
    """
    Matrix exponential (scaling and squaring with Padé approximants).

    Raises:
        NonFiniteMatrix: If the input contains NaN or inf
    """
    matrix = np.asarray(matrix, dtype=np.complex128)
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteMatrix("expm input contains non-finite entries")
    return np.asarray(scipy.linalg.expm(matrix))


# ============================================================================
# Exponents and generators
# ============================================================================


def _two_mode_ladders(cutoff: int) -> Tuple[np.ndarray, np.ndarray]:
    ops = ladder_ops(cutoff)
    identity = np.eye(cutoff)
    return np.kron(ops.a, identity), np.kron(identity, ops.a)


def _as_params(params: Union[float, complex, Sequence[float]]) -> Tuple[float, ...]:
    if isinstance(params, (int, float, complex, np.number)):
        return (params,)  # type: ignore[return-value]
    return tuple(params)


def gate_exponent(
    kind: Union[GeneratorKind, str], params: Union[float, Sequence[float]], cutoff: int
) -> np.ndarray:
    """
    Exponent A of U = expm(A) for a gate family.

    Args:
        kind: D_re/D_im (params = (re, im)), R, S, K (params = (value,)),
            BS_theta/BS_phi (params = (theta, phi))
        params: Gate parameters
        cutoff: Fock levels per mode
    """
    kind = GeneratorKind(kind)
    values = _as_params(params)
    ops = ladder_ops(cutoff)
    if kind in (GeneratorKind.D_RE, GeneratorKind.D_IM):
        alpha = complex(values[0], values[1] if len(values) > 1 else 0.0)
        return alpha * ops.adag - np.conj(alpha) * ops.a
    if kind is GeneratorKind.R:
        return 1j * values[0] * ops.number
    if kind is GeneratorKind.K:
        return 1j * values[0] * (ops.number @ ops.number)
    if kind is GeneratorKind.S:
        return 0.5 * values[0] * (ops.a @ ops.a - ops.adag @ ops.adag)
    theta, phi = values[0], values[1] if len(values) > 1 else 0.0
    a, b = _two_mode_ladders(cutoff)
    hop = np.exp(1j * phi) * a @ b.conj().T
    return theta * (hop - hop.conj().T)


def gate_generator(
    kind: Union[GeneratorKind, str], params: Union[float, Sequence[float]], cutoff: int
) -> np.ndarray:
    """
    Derivative of the exponent with respect to one parameter.

    For R, K, S and BS_theta the generator G commutes with the exponent, so
    dU/dp = G·U. For D_re, D_im and BS_phi ``gate_derivative`` applies the
    Fréchet derivative of expm along G instead.

    Example:
        >>> np.allclose(gate_generator("R", 0.3, 4), 1j * np.diag(np.arange(4)))
        True
    """
    kind = GeneratorKind(kind)
    values = _as_params(params)
    ops = ladder_ops(cutoff)
    if kind is GeneratorKind.D_RE:
        return ops.adag - ops.a
    if kind is GeneratorKind.D_IM:
        return 1j * (ops.adag + ops.a)
    if kind is GeneratorKind.R:
        return 1j * ops.number
    if kind is GeneratorKind.K:
        return 1j * (ops.number @ ops.number)
    if kind is GeneratorKind.S:
        return 0.5 * (ops.a @ ops.a - ops.adag @ ops.adag)
    theta, phi = values[0], values[1] if len(values) > 1 else 0.0
    a, b = _two_mode_ladders(cutoff)
    hop = np.exp(1j * phi) * a @ b.conj().T
    if kind is GeneratorKind.BS_THETA:
        return hop - hop.conj().T
    return theta * (1j * hop + 1j * hop.conj().T)


_COMMUTING = {GeneratorKind.R, GeneratorKind.K, GeneratorKind.S, GeneratorKind.BS_THETA}


def gate_derivative(
    kind: Union[GeneratorKind, str], params: Union[float, Sequence[float]], cutoff: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gate matrix and its exact derivative with respect to the parameter ``kind`` names.

    Returns:
        (U, dU/dp)
    """
    kind = GeneratorKind(kind)
    exponent = gate_exponent(kind, params, cutoff)
    generator = gate_generator(kind, params, cutoff)
    if kind in _COMMUTING:
        unitary = expm(exponent)
        return unitary, generator @ unitary
    unitary, derivative = scipy.linalg.expm_frechet(exponent, generator, compute_expm=True)
    return np.asarray(unitary), np.asarray(derivative)


# ============================================================================
# Gate constructors
# ============================================================================


def displacement(alpha: complex, cutoff: int) -> GateMatrix:
    """D(alpha) = expm(alpha a† − alpha* a) on the truncated ladders."""
    alpha = complex(alpha)
    exponent = gate_exponent(GeneratorKind.D_RE, (alpha.real, alpha.imag), cutoff)
    return GateMatrix(expm(exponent), cutoff)


def rotation(phi: float, cutoff: int) -> GateMatrix:
    """R(phi) = diag(exp(i phi n)), exactly unitary."""
    return GateMatrix(np.diag(np.exp(1j * phi * np.arange(cutoff))), cutoff)


def squeeze(r: float, cutoff: int) -> GateMatrix:
    """S(r) = expm((r/2)(a² − a†²)); x-variance of S(r)|0> is exp(-2r)/2."""
    return GateMatrix(expm(gate_exponent(GeneratorKind.S, r, cutoff)), cutoff)


def kerr(kappa: float, cutoff: int) -> GateMatrix:
    """K(kappa) = diag(exp(i kappa n²)), exactly unitary."""
    levels = np.arange(cutoff, dtype=float)
    return GateMatrix(np.diag(np.exp(1j * kappa * levels**2)), cutoff)


def beamsplitter_by_angle(theta: float, phi: float, cutoff: int) -> GateMatrix:
    """Two-mode beamsplitter expm(θ(e^{iφ} a b† − e^{−iφ} a† b))."""
    exponent = gate_exponent(GeneratorKind.BS_THETA, (theta, phi), cutoff)
    return GateMatrix(expm(exponent), cutoff, arity=2)


def beamsplitter_by_transmissivity(eta: float, cutoff: int) -> GateMatrix:
    """
    Beamsplitter with intensity transmission eta (phi = 0).

    Raises:
        InvalidState: If eta is outside [0, 1]
    """
    if not 0.0 <= eta <= 1.0:
        raise InvalidState(f"Transmissivity must lie in [0, 1], got {eta}")
    return beamsplitter_by_angle(float(np.arccos(np.sqrt(eta))), 0.0, cutoff)


def beamsplitter_block(theta: float, phi: float, total: int) -> np.ndarray:
    """
    Beamsplitter restricted to the complete subspace of fixed photon number.

    The basis is |total − i, i>, i = 0..total (mode A count first). Photon
    number is conserved, so this block is the exact untruncated action; the
    cutoff-c gate coincides with it for every total <= c − 1.
    """
    i = np.arange(total)
    hops = np.exp(1j * phi) * np.sqrt((total - i) * (i + 1.0))
    generator = np.zeros((total + 1, total + 1), dtype=np.complex128)
    generator[i + 1, i] = hops
    generator[i, i + 1] = -np.conj(hops)
    return expm(theta * generator)


# ============================================================================
# Application
# ============================================================================


def embed_single_mode(u: GateMatrix, target: Union[Mode, str], cutoff: int) -> GateMatrix:
    """Lift a single-mode gate to u ⊗ I (target A) or I ⊗ u (target B)."""
    if u.arity != 1:
        raise InvalidState("embed_single_mode expects a single-mode gate")
    if u.cutoff != cutoff:
        raise InvalidState(f"Cutoff mismatch: gate {u.cutoff} vs {cutoff}")
    identity = np.eye(cutoff)
    if Mode(target) is Mode.A:
        return GateMatrix(np.kron(u.data, identity), cutoff, arity=2)
    return GateMatrix(np.kron(identity, u.data), cutoff, arity=2)


def conjugate(rho: DensityMatrix, u: Union[GateMatrix, np.ndarray]) -> DensityMatrix:
    """u rho u†, symmetrized so Hermiticity survives rounding."""
    matrix = u.data if isinstance(u, GateMatrix) else np.asarray(u)
    if matrix.shape != rho.data.shape:
        raise InvalidState(f"Gate shape {matrix.shape} does not match state {rho.data.shape}")
    out = matrix @ rho.data @ matrix.conj().T
    return rho.with_data(0.5 * (out + out.conj().T))


def apply_to_ket(u: GateMatrix, ket: Ket) -> Ket:
    """u|psi> for a single-mode gate."""
    if u.arity != 1 or u.cutoff != ket.cutoff:
        raise InvalidState("apply_to_ket expects a single-mode gate at the ket's cutoff")
    return Ket(u.data @ ket.amplitudes, ket.cutoff)


def vacuum_orbit(gates: List[GateMatrix], cutoff: int) -> Ket:
    """Apply gates (first element first) to |0>."""
    amplitudes = np.zeros(cutoff, dtype=np.complex128)
    amplitudes[0] = 1.0
    for gate in gates:
        amplitudes = gate.data @ amplitudes
    return Ket(amplitudes, cutoff)
