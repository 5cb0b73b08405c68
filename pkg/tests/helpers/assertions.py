"""
Assertion helpers for density matrices.
"""

import numpy as np

from cvqd.models.states import DensityMatrix
from cvqd.physics.fock import trace_distance


def assert_density_valid(rho: DensityMatrix, trace_tol: float = 1e-9) -> None:
    """
    Assert that rho is Hermitian, positive semidefinite and has trace at most 1.

    Args:
        rho: State to validate
        trace_tol: Allowed trace excess above 1

    Raises:
        AssertionError: If any invariant fails
    """
    assert rho.hermiticity_error() < 1e-10, (
        f"State is not Hermitian (deviation {rho.hermiticity_error():.3e})"
    )
    assert rho.trace <= 1.0 + trace_tol, f"Trace {rho.trace} exceeds 1"
    smallest = float(np.linalg.eigvalsh(rho.data)[0])
    assert smallest > -1e-9, f"State has negative eigenvalue {smallest:.3e}"


def assert_states_close(a: DensityMatrix, b: DensityMatrix, atol: float = 1e-10) -> None:
    """
    Assert two states agree in trace distance.

    Args:
        a: First state
        b: Second state
        atol: Largest accepted trace distance

    Raises:
        AssertionError: If the shapes differ or the distance exceeds atol
    """
    assert a.data.shape == b.data.shape, f"Shapes differ: {a.data.shape} vs {b.data.shape}"
    distance = trace_distance(a, b)
    assert distance <= atol, f"Trace distance {distance:.3e} exceeds {atol:.1e}"
