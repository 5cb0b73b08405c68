"""
Independent oracles for the forward process.

The loss channel oracle builds the full two-mode beamsplitter at a working
cutoff of 2c - 1, where it is exact for every input the block evaluation
touches, and composes the channel literally: embed, apply, trace, truncate.
"""

from typing import Sequence

import numpy as np

from cvqd.models.states import DensityMatrix
from cvqd.physics.diffusion import Environment, thermal_loss_step
from cvqd.physics.gates import beamsplitter_by_transmissivity


def literal_loss_channel(rho: DensityMatrix, eta: float, env: Environment) -> DensityMatrix:
    """
    Tr_E[U_BS (rho ⊗ rho_th) U_BS†] with the whole environment traced out.

    Args:
        rho: Single-mode input at cutoff c
        eta: Transmissivity
        env: Thermal environment (populations renormalized at c)

    Returns:
        Output system state truncated back to cutoff c
    """
    c = rho.cutoff
    working = 2 * c - 1
    system = np.zeros((working, working), dtype=np.complex128)
    system[:c, :c] = rho.data
    environment = np.zeros((working, working), dtype=np.complex128)
    environment[:c, :c] = np.diag(env.populations(c))

    u = beamsplitter_by_transmissivity(eta, working).data
    joint = u @ np.kron(system, environment) @ u.conj().T
    reduced = np.einsum("ijkj->ik", joint.reshape(working, working, working, working))
    return DensityMatrix(reduced[:c, :c], c)


def sequential_diffusion(
    rho: DensityMatrix, etas: Sequence[float], env: Environment
) -> DensityMatrix:
    """Apply one thermal loss step per transmissivity, in order."""
    state = rho
    for eta in etas:
        state = thermal_loss_step(state, float(eta), env)
    return state
