"""
State value types for truncated Fock-basis simulation.

These are the structures every physics module consumes and produces. They are
immutable after construction: the underlying numpy arrays are copied and
marked read-only, so states can be shared freely between threads.

Key Principle: a two-mode composite basis index is ``n_A * c + n_B`` with mode
A the most significant slot.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from cvqd.constants import FockConstants as FC
from cvqd.exceptions import InvalidState

ArrayLike = Union[np.ndarray, list]


def _frozen_complex(values: ArrayLike) -> np.ndarray:
    array = np.array(values, dtype=np.complex128)
    array.setflags(write=False)
    return array


def _check_cutoff(cutoff: int) -> None:
    if int(cutoff) != cutoff or cutoff < FC.MIN_CUTOFF:
        raise InvalidState(f"Cutoff must be an integer >= {FC.MIN_CUTOFF}, got {cutoff}")


@dataclass(frozen=True)
class Ket:
    """
    Pure single-mode state vector in the truncated Fock basis.

    Attributes:
        amplitudes: Complex amplitudes for levels 0..cutoff-1
        cutoff: Number of retained Fock levels
    """

    amplitudes: np.ndarray
    cutoff: int

    def __post_init__(self) -> None:
        _check_cutoff(self.cutoff)
        amplitudes = _frozen_complex(self.amplitudes)
        if amplitudes.shape != (self.cutoff,):
            raise InvalidState(
                f"Ket amplitudes must have shape ({self.cutoff},), got {amplitudes.shape}"
            )
        if not np.all(np.isfinite(amplitudes)):
            raise InvalidState("Ket amplitudes contain non-finite values")
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def norm_squared(self) -> float:
        """Squared norm; below 1 by exactly the population lost to truncation."""
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def to_density(self) -> "DensityMatrix":
        """Return |psi><psi| as a single-mode density matrix."""
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.cutoff)


@dataclass(frozen=True)
class DensityMatrix:
    """
    Truncated Fock-basis mixed state of one or two qumodes.

    The trace may sit below 1 when population leaked past the cutoff; it is
    never renormalized implicitly.

    Attributes:
        data: Complex matrix of dimension cutoff**modes
        cutoff: Number of retained Fock levels per mode
        modes: 1 or 2
    """

    data: np.ndarray
    cutoff: int
    modes: int = 1

    def __post_init__(self) -> None:
        _check_cutoff(self.cutoff)
        if self.modes not in (1, FC.MAX_MODES):
            raise InvalidState(f"Only 1- and 2-mode states are supported, got {self.modes}")
        data = _frozen_complex(self.data)
        dim = self.cutoff**self.modes
        if data.shape != (dim, dim):
            raise InvalidState(
                f"Density matrix for {self.modes} mode(s) at cutoff {self.cutoff} "
                f"must be {dim}x{dim}, got {data.shape}"
            )
        if not np.all(np.isfinite(data)):
            raise InvalidState("Density matrix contains non-finite values")
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.cutoff**self.modes

    @property
    def trace(self) -> float:
        return float(np.trace(self.data).real)

    def hermiticity_error(self) -> float:
        """Max absolute element of rho - rho^dagger."""
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def check(self) -> None:
        """
        Verify the density-matrix invariants.

        Raises:
            InvalidState: If the matrix is not Hermitian, has trace above 1 or a
                significantly negative eigenvalue
        """
        herm = self.hermiticity_error()
        if herm > FC.HERMITIAN_TOL * max(1.0, float(np.max(np.abs(self.data)))):
            raise InvalidState(f"Density matrix is not Hermitian (max deviation {herm:.3e})")
        trace = self.trace
        if trace < -FC.TRACE_EXCESS_TOL or trace > 1.0 + FC.TRACE_EXCESS_TOL:
            raise InvalidState(f"Density matrix trace {trace!r} outside [0, 1]")
        smallest = float(np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T))[0])
        if smallest < FC.EIGENVALUE_CLAMP:
            raise InvalidState(f"Density matrix has negative eigenvalue {smallest:.3e}")

    def with_data(self, data: np.ndarray) -> "DensityMatrix":
        """New state with the same cutoff and mode count."""
        return DensityMatrix(data, self.cutoff, self.modes)


@dataclass(frozen=True)
class PhasePoint:
    """
    Point of the (x, p) phase plane.

    Attributes:
        x: Position quadrature coordinate
        p: Momentum quadrature coordinate
    """

    x: float
    p: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.x) and np.isfinite(self.p)):
            raise InvalidState(f"Phase point must be finite, got ({self.x}, {self.p})")

    @property
    def beta(self) -> complex:
        """Complex amplitude (x + ip)/sqrt(2) of the point."""
        return complex(self.x, self.p) / np.sqrt(2.0)
