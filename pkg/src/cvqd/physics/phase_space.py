"""
Wigner function of single-mode states.

``wigner`` evaluates the displaced-parity form
W(x, p) = (1/π) tr[D(−β) ρ D(β) Π], β = (x + ip)/√2, with the displacement
built in a working space large enough that it is exact on the support of ρ.
``laguerre_wigner`` is the closed-form Laguerre expansion of the same
function and serves as an independent oracle.
"""

import logging
import math
from typing import Sequence

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from cvqd.constants import FockConstants as FC
from cvqd.exceptions import InvalidState
from cvqd.models.states import DensityMatrix, PhasePoint
from cvqd.physics.gates import displacement

logger = logging.getLogger(__name__)


def _working_cutoff(cutoff: int, beta: complex) -> int:
    radius = abs(beta)
    margin = radius**2 + FC.WIGNER_MARGIN_LINEAR * radius
    return cutoff + int(math.ceil(margin)) + FC.WIGNER_MARGIN_FIXED


def wigner(rho: DensityMatrix, grid: Sequence[PhasePoint]) -> np.ndarray:
    """
    Wigner function on a list of phase-space points.

    Args:
        rho: Normalized single-mode state
        grid: Points to evaluate

    Returns:
        Real array with one value per point

    Example:
        >>> wigner(make_vacuum(10), [PhasePoint(0.0, 0.0)])
        array([0.31830989])
    """
    if rho.modes != 1:
        raise InvalidState("wigner expects a single-mode state")
    c = rho.cutoff
    values = np.empty(len(grid))
    for index, point in enumerate(grid):
        beta = point.beta
        working = _working_cutoff(c, beta)
        rows = displacement(beta, working).data[:c, :]
        parity = (-1.0) ** np.arange(working)
        shifted_diag = np.einsum("mk,mn,nk->k", rows.conj(), rho.data, rows)
        values[index] = float(np.real(np.sum(parity * shifted_diag))) / math.pi
    return values


def laguerre_wigner(rho: DensityMatrix, grid: Sequence[PhasePoint]) -> np.ndarray:
    """
    Closed-form Wigner function via generalized Laguerre polynomials.

    W = Σ ρ_mn W_mn with, for n >= m,
    W_mn(β) = (1/π)(−1)^m sqrt(m!/n!) (2β)^(n−m) exp(−2|β|²) L_m^(n−m)(4|β|²)
    and W_nm = conj(W_mn).
    """
    if rho.modes != 1:
        raise InvalidState("laguerre_wigner expects a single-mode state")
    c = rho.cutoff
    betas = np.array([point.beta for point in grid], dtype=np.complex128)
    radius_sq = np.abs(betas) ** 2
    envelope = np.exp(-2.0 * radius_sq) / math.pi
    total = np.zeros(len(grid), dtype=np.complex128)
    for m in range(c):
        for n in range(m, c):
            if rho.data[m, n] == 0 and rho.data[n, m] == 0:
                continue
            k = n - m
            coefficient = (-1.0) ** m * np.exp(0.5 * (gammaln(m + 1) - gammaln(n + 1)))
            term = coefficient * (2.0 * betas) ** k * envelope
            term = term * eval_genlaguerre(m, k, 4.0 * radius_sq)
            if k == 0:
                total += rho.data[m, m] * term
            else:
                total += rho.data[m, n] * term + rho.data[n, m] * np.conj(term)
    return np.real(total)


def phase_grid(extent: float, points: int) -> list[PhasePoint]:
    """Square grid of points×points covering [-extent, extent]²."""
    axis = np.linspace(-extent, extent, points)
    return [PhasePoint(float(x), float(p)) for p in axis for x in axis]
