"""
Truncated Fock-basis states and state-level operations.

This module builds the standard single-mode states (vacuum, number, coherent,
thermal, squeezed vacuum, cat), combines and reduces two-mode states, and
evaluates the quantities the rest of the package is measured with: Uhlmann
fidelity (plus its gradient), photon-number and quadrature moments, purity
and trace distance.

Conventions: ħ = 1, x = (a + a†)/√2, p = (a − a†)/(i√2).
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple, Union

import numpy as np

from cvqd.constants import FockConstants as FC
from cvqd.constants import Mode, Parity
from cvqd.exceptions import DegenerateState, InvalidState, NotPSD, OutOfCutoff
from cvqd.models.states import DensityMatrix, Ket

logger = logging.getLogger(__name__)


# ============================================================================
# Ladder operators
# ============================================================================


@dataclass(frozen=True)
class LadderOps:
    """
    Truncated ladder operators for one mode.

    [a, a†] = I holds exactly on the first c-1 levels; the top diagonal entry
    of the commutator is the known truncation artifact (1 - c instead of 1).

    Attributes:
        cutoff: Number of retained Fock levels
        a: Annihilation matrix, <n-1|a|n> = sqrt(n)
        adag: Creation matrix (conjugate transpose of a)
        number: Diagonal number operator diag(0..c-1), exact at every cutoff
    """

    cutoff: int
    a: np.ndarray
    adag: np.ndarray
    number: np.ndarray


@lru_cache(maxsize=64)
def ladder_ops(cutoff: int) -> LadderOps:
    """Return the (cached, read-only) ladder operators for a cutoff."""
    a = np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1).astype(np.complex128)
    adag = a.conj().T.copy()
    number = np.diag(np.arange(cutoff, dtype=float)).astype(np.complex128)
    for matrix in (a, adag, number):
        matrix.setflags(write=False)
    return LadderOps(cutoff=cutoff, a=a, adag=adag, number=number)


# ============================================================================
# State constructors
# ============================================================================


def make_vacuum(cutoff: int) -> DensityMatrix:
    """Return |0><0|."""
    data = np.zeros((cutoff, cutoff), dtype=np.complex128)
    data[0, 0] = 1.0
    return DensityMatrix(data, cutoff)


def make_fock(n: int, cutoff: int) -> DensityMatrix:
    """
    Return the number state |n><n|.

    Raises:
        OutOfCutoff: If n is not in 0..cutoff-1
    """
    if not 0 <= n < cutoff:
        raise OutOfCutoff(f"Fock level {n} is outside the truncated space 0..{cutoff - 1}")
    data = np.zeros((cutoff, cutoff), dtype=np.complex128)
    data[n, n] = 1.0
    return DensityMatrix(data, cutoff)


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Amplitudes exp(-|a|^2/2) a^n / sqrt(n!) for n < cutoff, built by recursion."""
    amplitudes = np.empty(cutoff, dtype=np.complex128)
    amplitudes[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, cutoff):
        amplitudes[n] = amplitudes[n - 1] * alpha / np.sqrt(n)
    return amplitudes


def make_coherent(alpha: complex, cutoff: int) -> Ket:
    """
    Coherent state |alpha> truncated at the cutoff.

    The norm deficit 1 - sum |a_n|^2 equals the Poisson(|alpha|^2) tail mass
    beyond cutoff-1; callers decide whether it is acceptable.
    """
    return Ket(coherent_amplitudes(complex(alpha), cutoff), cutoff)


def make_thermal(nbar: float, cutoff: int) -> DensityMatrix:
    """
    Thermal state with mean photon number nbar.

    The tail beyond the cutoff is discarded, not renormalized: the trace is
    1 - (nbar/(1+nbar))**cutoff. Use ``renormalize`` for a unit-trace state.
    """
    if nbar < 0:
        raise InvalidState(f"Mean photon number must be >= 0, got {nbar}")
    return DensityMatrix(np.diag(thermal_populations(nbar, cutoff)).astype(np.complex128), cutoff)


def thermal_populations(nbar: float, cutoff: int) -> np.ndarray:
    """Boltzmann weights nbar^n / (1+nbar)^(n+1), n < cutoff."""
    ratio = nbar / (1.0 + nbar)
    return np.power(ratio, np.arange(cutoff, dtype=float)) / (1.0 + nbar)


def make_squeezed_vacuum(r: float, cutoff: int) -> Ket:
    """
    Squeezed vacuum S(r)|0> with x-variance exp(-2r)/2.

    Even amplitudes (1/sqrt(cosh r)) (-tanh r)^n sqrt((2n)!) / (2^n n!), odd
    amplitudes zero.
    """
    amplitudes = np.zeros(cutoff, dtype=np.complex128)
    amplitudes[0] = 1.0 / np.sqrt(np.cosh(r))
    ratio = -np.tanh(r)
    for m in range(2, cutoff, 2):
        amplitudes[m] = amplitudes[m - 2] * ratio * np.sqrt((m - 1) / m)
    return Ket(amplitudes, cutoff)


def make_cat(alpha: float, parity: Union[Parity, str], cutoff: int) -> Ket:
    """
    Cat state N(|alpha> +/- |-alpha>), N = 1/sqrt(2(1 +/- exp(-2 alpha^2))).

    Raises:
        DegenerateState: For an odd cat with alpha = 0
    """
    parity = Parity(parity)
    sign = 1.0 if parity is Parity.EVEN else -1.0
    overlap = np.exp(-2.0 * alpha**2)
    norm_sq = 2.0 * (1.0 + sign * overlap)
    if norm_sq <= 0.0 or (parity is Parity.ODD and alpha == 0):
        raise DegenerateState("Odd cat state requires alpha > 0")
    base = coherent_amplitudes(complex(alpha), cutoff)
    levels = np.arange(cutoff)
    amplitudes = base * (1.0 + sign * (-1.0) ** levels) / np.sqrt(norm_sq)
    return Ket(amplitudes, cutoff)


# ============================================================================
# Composition and reduction
# ============================================================================


def _require_single_mode(rho: DensityMatrix, operation: str) -> None:
    if rho.modes != 1:
        raise InvalidState(f"{operation} expects a single-mode state, got {rho.modes} modes")


def tensor_product(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """
    Two-mode product state a ⊗ b with a in slot A.

    Raises:
        InvalidState: If either input is not single-mode or the cutoffs differ
    """
    _require_single_mode(a, "tensor_product")
    _require_single_mode(b, "tensor_product")
    if a.cutoff != b.cutoff:
        raise InvalidState(f"Cutoff mismatch in tensor_product: {a.cutoff} vs {b.cutoff}")
    return DensityMatrix(np.kron(a.data, b.data), a.cutoff, modes=2)


def partial_trace(rho: DensityMatrix, over: Union[Mode, str]) -> DensityMatrix:
    """
    Trace out one slot of a two-mode state.

    Args:
        rho: Two-mode state
        over: Slot to discard ("A" or "B")

    Returns:
        Single-mode state of the retained slot
    """
    if rho.modes != 2:
        raise InvalidState("partial_trace requires a two-mode state")
    c = rho.cutoff
    blocks = rho.data.reshape(c, c, c, c)
    if Mode(over) is Mode.B:
        reduced = np.einsum("ijkj->ik", blocks)
    else:
        reduced = np.einsum("ijil->jl", blocks)
    return DensityMatrix(0.5 * (reduced + reduced.conj().T), c)


def renormalize(rho: DensityMatrix) -> DensityMatrix:
    """
    Divide a state by its trace.

    Raises:
        DegenerateState: If the trace is zero
    """
    trace = rho.trace
    if trace <= 0.0:
        raise DegenerateState(f"Cannot renormalize a state with trace {trace!r}")
    return rho.with_data(rho.data / trace)


# ============================================================================
# Spectral helpers and fidelity
# ============================================================================


def _check_hermitian(matrix: np.ndarray, what: str) -> None:
    scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
    deviation = float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0
    if deviation > FC.SQRT_HERMITIAN_TOL * scale:
        raise InvalidState(f"{what} is not Hermitian (max deviation {deviation:.3e})")


def _clamped_eigh(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    values, vectors = np.linalg.eigh(0.5 * (matrix + matrix.conj().T))
    return np.clip(values, 0.0, None), vectors


def hermitian_sqrt(matrix: np.ndarray) -> np.ndarray:
    """
    Square root of a Hermitian positive semidefinite matrix.

    Eigenvalues in (-1e-9, 0) are clamped to zero as truncation noise.

    Raises:
        InvalidState: If the matrix is not Hermitian within 1e-10
        NotPSD: If an eigenvalue is below -1e-9
    """
    matrix = np.asarray(matrix, dtype=np.complex128)
    _check_hermitian(matrix, "Matrix")
    values, vectors = np.linalg.eigh(0.5 * (matrix + matrix.conj().T))
    if values.size and values[0] < FC.EIGENVALUE_CLAMP:
        raise NotPSD(f"Matrix has negative eigenvalue {values[0]:.3e}")
    roots = np.sqrt(np.clip(values, 0.0, None))
    return (vectors * roots) @ vectors.conj().T


def _support(rho: DensityMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """Square roots of the supported eigenvalues and their eigenvectors."""
    values, vectors = _clamped_eigh(rho.data)
    keep = values > FC.SUPPORT_TOL
    return np.sqrt(values[keep]), vectors[:, keep]


def _support_rows(rho: DensityMatrix) -> np.ndarray:
    """sqrt(rho) on its numerical support, one row per supported eigenvector."""
    roots, vectors = _support(rho)
    return roots[:, None] * vectors.conj().T


def density_factor(rho: DensityMatrix, tol: float = FC.SUPPORT_TOL) -> np.ndarray:
    """
    Factor A with rho = A A†, one column per eigenvalue above tol.

    The default keeps the numerical support, so rounding-level eigenvalues of a
    rank-deficient state do not enter as spurious columns.
    """
    values, vectors = _clamped_eigh(rho.data)
    keep = values > tol
    return vectors[:, keep] * np.sqrt(values[keep])[None, :]


def factor_fidelity(reference: DensityMatrix, factor: np.ndarray) -> float:
    """
    Fidelity of the reference against sigma = A A†, given the factor A.

    The square roots of the eigenvalues of sqrt(rho) sigma sqrt(rho) are the
    singular values of sqrt(rho) A, so the result is as accurate as the
    entries of A and never takes the square root of a rounded eigenvalue.
    """
    rows = _support_rows(reference)
    if rows.shape[0] == 0 or factor.shape[1] == 0:
        return 0.0
    singular = np.linalg.svd(rows @ factor, compute_uv=False)
    return float(np.sum(singular)) ** 2


def factor_fidelity_gradient(
    reference: DensityMatrix, factor: np.ndarray
) -> Tuple[float, np.ndarray]:
    """
    factor_fidelity and its gradient in the factor.

    Returns:
        (F, H) with H of shape (columns of A, dim) such that dF = Re tr(H dA)
    """
    rows = _support_rows(reference)
    if rows.shape[0] == 0 or factor.shape[1] == 0:
        return 0.0, np.zeros((factor.shape[1], reference.dim), dtype=np.complex128)
    left, singular, right_h = np.linalg.svd(rows @ factor, full_matrices=False)
    norm = float(np.sum(singular))
    gradient = 2.0 * norm * (right_h.conj().T @ (left.conj().T @ rows))
    return norm**2, gradient


def _check_pair(rho: DensityMatrix, sigma: DensityMatrix) -> None:
    if rho.data.shape != sigma.data.shape:
        raise InvalidState(f"Fidelity of mismatched shapes {rho.data.shape} vs {sigma.data.shape}")
    _check_hermitian(rho.data, "First fidelity argument")
    _check_hermitian(sigma.data, "Second fidelity argument")


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """
    Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    The product is evaluated on the numerical support of whichever argument has
    fewer non-negligible eigenvalues, so for a pure argument |psi><psi| the
    result is <psi|sigma|psi> to machine precision. Both inputs are clamped to
    their positive part.

    Raises:
        InvalidState: On shape mismatch or non-Hermitian input

    Example:
        >>> fidelity(make_vacuum(15), make_coherent(1.0, 15).to_density())
        0.36787944...
    """
    _check_pair(rho, sigma)
    if _support(sigma)[0].size < _support(rho)[0].size:
        rho, sigma = sigma, rho
    return factor_fidelity(rho, density_factor(sigma))


def reference_fidelity(reference: DensityMatrix, sigma: DensityMatrix) -> float:
    """Fidelity evaluated on the support of the reference; the form the loss differentiates."""
    _check_pair(reference, sigma)
    return factor_fidelity(reference, density_factor(sigma))


def fidelity_gradient(reference: DensityMatrix, sigma: DensityMatrix) -> Tuple[float, np.ndarray]:
    """
    Fidelity against a fixed reference and its gradient in sigma.

    The gradient weights eigenvectors of the reduced product by 1/sqrt(mu);
    eigenvalues mu at or below FockConstants.GRADIENT_WEIGHT_FLOOR get no
    weight. The returned value is exact.

    Returns:
        (F, G) with G Hermitian such that dF = Re tr(G dsigma)
    """
    _check_pair(reference, sigma)
    value = factor_fidelity(reference, density_factor(sigma))
    rows = _support_rows(reference)
    dim = sigma.dim
    if rows.shape[0] == 0 or value == 0.0:
        return value, np.zeros((dim, dim), dtype=np.complex128)
    product = rows @ sigma.data @ rows.conj().T
    mu, w = np.linalg.eigh(0.5 * (product + product.conj().T))
    live = mu > FC.GRADIENT_WEIGHT_FLOOR
    weighted = (w[:, live] / np.sqrt(mu[live])) @ w[:, live].conj().T
    gradient = np.sqrt(value) * (rows.conj().T @ weighted @ rows)
    return value, 0.5 * (gradient + gradient.conj().T)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Half the trace norm of rho - sigma."""
    if rho.data.shape != sigma.data.shape:
        raise InvalidState("trace_distance of mismatched shapes")
    difference = rho.data - sigma.data
    values = np.linalg.eigvalsh(0.5 * (difference + difference.conj().T))
    return float(0.5 * np.sum(np.abs(values)))


def purity(rho: DensityMatrix) -> float:
    """tr(rho^2) / tr(rho)^2."""
    trace = rho.trace
    if trace <= 0.0:
        raise DegenerateState("Purity of a zero-trace state is undefined")
    return float(np.real(np.vdot(rho.data.conj().T, rho.data))) / trace**2


# ============================================================================
# Moments
# ============================================================================


def _normalized_expectation(rho: DensityMatrix, operator: np.ndarray) -> float:
    trace = rho.trace
    if trace <= 0.0:
        raise DegenerateState("Moments of a zero-trace state are undefined")
    return float(np.real(np.sum(rho.data * operator.T))) / trace


def _quadrature_ops(cutoff: int, which: str) -> Tuple[np.ndarray, np.ndarray]:
    """Quadrature operator and its square, the square exact on every retained level."""
    ops = ladder_ops(cutoff)
    a_sq = ops.a @ ops.a
    adag_sq = ops.adag @ ops.adag
    identity = np.eye(cutoff)
    if which == "x":
        op = (ops.a + ops.adag) / np.sqrt(2.0)
        square = 0.5 * (a_sq + adag_sq + 2.0 * ops.number + identity)
    elif which == "p":
        op = (ops.a - ops.adag) / (1j * np.sqrt(2.0))
        square = 0.5 * (-a_sq - adag_sq + 2.0 * ops.number + identity)
    else:
        raise InvalidState(f"Unknown quadrature '{which}', expected 'x' or 'p'")
    return op, square


def mean_photon(rho: DensityMatrix) -> float:
    """<n> of the normalized state."""
    _require_single_mode(rho, "mean_photon")
    return _normalized_expectation(rho, ladder_ops(rho.cutoff).number)


def quadrature_mean(rho: DensityMatrix, which: str) -> float:
    """<x> or <p> of the normalized state."""
    _require_single_mode(rho, "quadrature_mean")
    op, _ = _quadrature_ops(rho.cutoff, which)
    return _normalized_expectation(rho, op)


def quadrature_variance(rho: DensityMatrix, which: str) -> float:
    """<X^2> - <X>^2 of the normalized state (vacuum gives 1/2)."""
    _require_single_mode(rho, "quadrature_variance")
    op, square = _quadrature_ops(rho.cutoff, which)
    mean = _normalized_expectation(rho, op)
    return _normalized_expectation(rho, square) - mean**2


def tail_mass(rho: DensityMatrix, from_level: int) -> float:
    """Population at Fock levels >= from_level of a single-mode state."""
    _require_single_mode(rho, "tail_mass")
    return float(np.sum(np.diag(rho.data).real[from_level:]))
