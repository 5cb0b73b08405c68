"""
Gradient estimators for the denoiser parameters.

* ``grad_central_fd``: one pair of loss evaluations per coordinate.
* ``grad_spsa``: two evaluations per random ±1 direction, averaged.
* ``grad_analytic``: exact gradient of a ``LossBatch`` from the gate-factor
  derivatives of the circuit.

Analytic form. A term's prediction is kept as a factor A = reshape(U Y), with
Y a factor of the joint input τ_t ⊗ ρ_t, so ρ̃ = A A†. The term loss changes
by Re tr(K dA) with K = w(−∇_A F + 4γ(tr ρ̃ − 1)A†). Regrouping K onto the
rows of U Y gives K', and Z = Σ_terms Y K' turns the loss change into
Re tr(Z dU). A perturbation of factor f then contributes Re tr(B_f Z A_f dF_f),
with A_f the factors applied after f and B_f those applied before it.
"""

import logging
from typing import Callable, List, Optional, Tuple

import numpy as np

from cvqd.exceptions import ConfigError
from cvqd.physics.denoiser import ThetaVector, circuit_factors, embedded_factor, time_embed
from cvqd.physics.fock import factor_fidelity_gradient
from cvqd.training.losses import (
    LossBatch,
    LossDiagnostics,
    LossTerm,
    factor_trace,
    map_ordered,
    summarize_terms,
)

logger = logging.getLogger(__name__)

LossFn = Callable[[np.ndarray], float]


def _as_values(theta: "np.ndarray | ThetaVector") -> np.ndarray:
    if isinstance(theta, ThetaVector):
        return np.array(theta.values, dtype=float)
    return np.array(theta, dtype=float)


def grad_central_fd(
    loss_fn: LossFn,
    theta: "np.ndarray | ThetaVector",
    fd_step: float,
    workers: int = 1,
) -> np.ndarray:
    """
    Central finite differences (L(ϑ + εe_k) − L(ϑ − εe_k)) / 2ε.

    Args:
        loss_fn: Deterministic loss of a raw parameter vector
        theta: Point of evaluation
        fd_step: ε > 0
        workers: Threads used for the coordinate evaluations

    Raises:
        ConfigError: If fd_step is not positive
    """
    if fd_step <= 0:
        raise ConfigError(f"fd_step must be positive, got {fd_step}")
    values = _as_values(theta)

    def central(k: int) -> float:
        shift = np.zeros_like(values)
        shift[k] = fd_step
        return (loss_fn(values + shift) - loss_fn(values - shift)) / (2.0 * fd_step)

    return np.array(map_ordered(central, list(range(values.size)), workers), dtype=float)


def grad_spsa(
    loss_fn: LossFn,
    theta: "np.ndarray | ThetaVector",
    perturb: float,
    rng: np.random.Generator,
    n_avg: int = 1,
) -> np.ndarray:
    """
    Simultaneous-perturbation estimate averaged over n_avg Rademacher directions.

    Each direction Δ costs two loss evaluations:
    g = (L(ϑ + cΔ) − L(ϑ − cΔ)) / 2c · Δ.

    Raises:
        ConfigError: If perturb is not positive or n_avg < 1
    """
    if perturb <= 0:
        raise ConfigError(f"SPSA perturbation must be positive, got {perturb}")
    if n_avg < 1:
        raise ConfigError(f"SPSA needs at least one direction, got {n_avg}")
    values = _as_values(theta)
    total = np.zeros_like(values)
    for _ in range(n_avg):
        direction = rng.choice(np.array([-1.0, 1.0]), size=values.size)
        delta = perturb * direction
        slope = (loss_fn(values + delta) - loss_fn(values - delta)) / (2.0 * perturb)
        total += slope * direction
    return total / n_avg


def _term_contribution(
    term: LossTerm, unitary: np.ndarray, batch: LossBatch
) -> Tuple[np.ndarray, float, float]:
    """Z contribution of one term plus its fidelity and penalty."""
    c = batch.cutoff
    tau = time_embed(term.t, batch.embed, c)
    factor, joint = embedded_factor(unitary, tau, term.rho_in)
    fid, fid_grad = factor_fidelity_gradient(term.reference, factor)
    excess = factor_trace(factor) - 1.0
    weight_matrix = term.weight * (-fid_grad + 4.0 * batch.gamma * excess * factor.conj().T)
    # K'[j, a·c + b] = K[b·k + j, a]
    k = joint.shape[1]
    lifted = weight_matrix.reshape(c, k, c).transpose(1, 2, 0).reshape(k, c * c)
    return joint @ lifted, fid, excess**2


def loss_and_grad_analytic(
    theta: ThetaVector, batch: LossBatch, workers: int = 1
) -> Tuple[LossDiagnostics, np.ndarray]:
    """
    Loss diagnostics and exact gradient of a batch from one forward sweep.

    Squeezing coordinates sitting on the clamp report zero derivative.
    """
    c = batch.cutoff
    dim = c * c
    factors = circuit_factors(theta, c, with_derivatives=True)
    count = len(factors)

    before: List[np.ndarray] = [np.eye(dim, dtype=np.complex128)]
    for factor in factors[:-1]:
        before.append(factor.matrix @ before[-1])
    unitary = factors[-1].matrix @ before[-1]
    after: List[Optional[np.ndarray]] = [None] * count
    after[-1] = np.eye(dim, dtype=np.complex128)
    for index in range(count - 2, -1, -1):
        following = after[index + 1]
        assert following is not None
        after[index] = following @ factors[index + 1].matrix

    results = map_ordered(
        lambda term: _term_contribution(term, unitary, batch), list(batch.terms), workers
    )
    z = np.zeros((dim, dim), dtype=np.complex128)
    for contribution, _, _ in results:
        z += contribution

    grad = np.zeros(theta.values.size)
    for index, factor in enumerate(factors):
        if not factor.derivatives:
            continue
        tail = after[index]
        assert tail is not None
        sandwich = before[index] @ z @ tail
        for param_index, derivative in factor.derivatives:
            grad[param_index] += float(np.real(np.sum(derivative * sandwich.T)))

    diagnostics = summarize_terms(batch, [(fid, pen) for _, fid, pen in results])
    return diagnostics, grad


def grad_analytic(theta: ThetaVector, batch: LossBatch, workers: int = 1) -> np.ndarray:
    """Exact gradient of the batch loss with respect to every parameter."""
    _, grad = loss_and_grad_analytic(theta, batch, workers)
    return grad
