"""
Target-state preparation with the cutoff safety check shared by training,
generation and sweeps.
"""

import logging

import numpy as np

from cvqd.constants import TargetKind
from cvqd.constants import TrainerConstants as TC
from cvqd.exceptions import CutoffTooSmall
from cvqd.models.config import TargetSpec
from cvqd.models.states import DensityMatrix
from cvqd.physics.fock import make_cat, make_coherent, make_fock, make_squeezed_vacuum, tail_mass

logger = logging.getLogger(__name__)


def build_target(spec: TargetSpec, cutoff: int) -> DensityMatrix:
    """Density matrix of a target descriptor, without the cutoff check."""
    if spec.kind is TargetKind.COHERENT:
        assert spec.alpha is not None
        alpha = spec.alpha * np.exp(1j * spec.phase)
        return make_coherent(alpha, cutoff).to_density()
    if spec.kind is TargetKind.SQUEEZED:
        assert spec.r is not None
        return make_squeezed_vacuum(spec.r, cutoff).to_density()
    if spec.kind is TargetKind.FOCK:
        assert spec.n is not None
        return make_fock(spec.n, cutoff)
    assert spec.alpha is not None
    return make_cat(spec.alpha, spec.parity, cutoff).to_density()


def truncation_error(rho: DensityMatrix) -> float:
    """Population on the top retained level plus the trace lost beyond the cutoff."""
    return tail_mass(rho, rho.cutoff - 1) + max(0.0, 1.0 - rho.trace)


def check_cutoff(rho: DensityMatrix, what: str = "Target") -> None:
    """
    Raises:
        CutoffTooSmall: If the truncation error exceeds TARGET_TAIL_TOL
    """
    error = truncation_error(rho)
    if error > TC.TARGET_TAIL_TOL:
        raise CutoffTooSmall(
            f"{what} leaks {error:.3e} of its population to the top Fock level or beyond "
            f"cutoff {rho.cutoff} (limit {TC.TARGET_TAIL_TOL:g}); raise cutoff_dim"
        )
    logger.debug(f"{what} truncation error {error:.3e} at cutoff {rho.cutoff}")


def prepare_target(spec: TargetSpec, cutoff: int) -> DensityMatrix:
    """
    Build a target and verify the cutoff can hold it.

    Args:
        spec: Target descriptor
        cutoff: Fock levels per mode

    Returns:
        Target density matrix (not renormalized)

    Raises:
        CutoffTooSmall: If the target is not representable at this cutoff
        OutOfCutoff: For a Fock level >= cutoff

    Example:
        >>> prepare_target(TargetSpec(kind="coherent", alpha=1.0), 8).trace
        0.99998...
    """
    rho = build_target(spec, cutoff)
    check_cutoff(rho, spec.label())
    return rho
