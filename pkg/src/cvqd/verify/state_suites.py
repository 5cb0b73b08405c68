"""
Suites for state preparation, fidelity and gates.
"""

import logging
from typing import Callable, List, Tuple

import numpy as np
from scipy.stats import poisson

from cvqd.constants import GeneratorKind, Mode, Parity
from cvqd.constants import VerifyConstants as VC
from cvqd.models.checkpoint import CheckResult
from cvqd.models.states import PhasePoint
from cvqd.physics.fock import (
    fidelity,
    fidelity_gradient,
    hermitian_sqrt,
    ladder_ops,
    make_cat,
    make_coherent,
    make_fock,
    make_squeezed_vacuum,
    make_thermal,
    make_vacuum,
    mean_photon,
    partial_trace,
    quadrature_variance,
    renormalize,
    tensor_product,
)
from cvqd.physics.gates import (
    beamsplitter_by_angle,
    beamsplitter_by_transmissivity,
    displacement,
    expm,
    gate_derivative,
    gate_exponent,
    squeeze,
    vacuum_orbit,
)
from cvqd.physics.phase_space import laguerre_wigner, phase_grid, wigner
from cvqd.verify.base import VerificationSuite, VerifyContext, random_density

logger = logging.getLogger(__name__)


class FockSuite(VerificationSuite):
    suite_id = "fock"
    description = "State constructors, truncation and the Wigner function"

    def run(self, ctx: VerifyContext) -> List[CheckResult]:
        checks = [self.at_most("vacuum trace error", abs(1.0 - make_vacuum(10).trace), 1e-15)]

        cutoff = 15
        for alpha in (0.5, 1.0, 2.0):
            deficit = 1.0 - make_coherent(alpha, cutoff).norm_squared
            tail = float(poisson.sf(cutoff - 1, alpha**2))
            checks.append(
                self.at_most(
                    f"coherent |{alpha}> norm deficit vs Poisson tail",
                    abs(deficit - tail),
                    1e-12,
                    f"c={cutoff}, tail={tail:.3e}",
                )
            )

        thermal = make_thermal(0.5, 20)
        checks.append(
            self.at_most(
                "thermal trace vs 1 - q^c",
                abs(thermal.trace - (1.0 - (0.5 / 1.5) ** 20)),
                1e-12,
            )
        )
        checks.append(
            self.at_most(
                "thermal mean photon number",
                abs(mean_photon(renormalize(make_thermal(0.5, 40))) - 0.5),
                1e-9,
            )
        )

        squeezed = make_squeezed_vacuum(0.5, 40).to_density()
        checks.append(
            self.at_most(
                "squeezed x-variance vs exp(-2r)/2",
                abs(quadrature_variance(squeezed, "x") - np.exp(-1.0) / 2.0),
                1e-8,
                "r=0.5, c=40",
            )
        )
        checks.append(
            self.at_most(
                "even cat normalization",
                abs(make_cat(1.0, Parity.EVEN, 20).norm_squared - 1.0),
                1e-12,
            )
        )

        rng = ctx.rng(1)
        rho_a, rho_b = random_density(rng, 6), random_density(rng, 6)
        reduced = partial_trace(tensor_product(rho_a, rho_b), Mode.B)
        checks.append(
            self.at_most(
                "partial trace of a product state",
                float(np.max(np.abs(reduced.data - rho_a.data))),
                1e-12,
            )
        )

        origin = [PhasePoint(0.0, 0.0)]
        checks.append(
            self.at_most(
                "Wigner of |1> at the origin",
                abs(wigner(make_fock(1, 10), origin)[0] + 1.0 / np.pi),
                1e-6,
            )
        )
        coherent = make_coherent(0.5 + 0.3j, 12).to_density()
        grid = phase_grid(2.0, 5)
        checks.append(
            self.at_most(
                "displaced-parity vs Laguerre Wigner",
                float(np.max(np.abs(wigner(coherent, grid) - laguerre_wigner(coherent, grid)))),
                1e-8,
                "coherent 0.5+0.3i, c=12, 5x5 grid",
            )
        )
        return checks


class FidelitySuite(VerificationSuite):
    suite_id = "fidelity"
    description = "Uhlmann fidelity, matrix square root and the fidelity gradient"

    def run(self, ctx: VerifyContext) -> List[CheckResult]:
        rng = ctx.rng(2)
        checks = []

        ket = make_coherent(0.6, 15)
        sigma = renormalize(make_thermal(0.4, 15))
        overlap = float(np.real(np.vdot(ket.amplitudes, sigma.data @ ket.amplitudes)))
        checks.append(
            self.at_most(
                "pure vs mixed equals <psi|sigma|psi>",
                abs(fidelity(ket.to_density(), sigma) - overlap),
                1e-10,
            )
        )

        rho, other = random_density(rng, 6), random_density(rng, 6)
        checks.append(self.at_most("self fidelity", abs(fidelity(rho, rho) - 1.0), 1e-9))
        asymmetry = abs(fidelity(rho, other) - fidelity(other, rho))
        checks.append(self.at_most("symmetry", asymmetry, 1e-9))
        orthogonal = fidelity(make_fock(0, 6), make_fock(1, 6))
        checks.append(self.at_most("orthogonal Fock states", orthogonal, 1e-12))

        root = hermitian_sqrt(rho.data)
        checks.append(
            self.at_most(
                "square root reconstruction",
                float(np.max(np.abs(root @ root - rho.data))),
                1e-10,
            )
        )

        step = 1e-6
        direction = random_density(rng, 6).data - np.eye(6) / 6.0
        value, gradient = fidelity_gradient(rho, other)
        plus = fidelity(rho, other.with_data(other.data + step * direction))
        minus = fidelity(rho, other.with_data(other.data - step * direction))
        predicted = float(np.real(np.sum(gradient * direction.T)))
        checks.append(
            self.at_most(
                "fidelity gradient vs finite difference",
                abs((plus - minus) / (2.0 * step) - predicted),
                1e-6,
                f"F={value:.6f}",
            )
        )
        return checks


def _restricted_unitarity(matrix: np.ndarray, columns: np.ndarray) -> float:
    norms = np.linalg.norm(matrix[:, columns], axis=0)
    return float(np.max(np.abs(norms - 1.0)))


def _perturbed_exponents(
    kind: GeneratorKind, params: Tuple[float, ...], slot: int, step: float, cutoff: int
) -> Tuple[np.ndarray, np.ndarray]:
    up, down = list(params), list(params)
    up[slot] += step
    down[slot] -= step
    return gate_exponent(kind, up, cutoff), gate_exponent(kind, down, cutoff)


# (kind, params, index of the parameter the kind differentiates)
_DERIVATIVE_CASES: List[Tuple[GeneratorKind, Tuple[float, ...], int]] = [
    (GeneratorKind.D_RE, (0.3, -0.2), 0),
    (GeneratorKind.D_IM, (0.3, -0.2), 1),
    (GeneratorKind.R, (0.4,), 0),
    (GeneratorKind.S, (0.25,), 0),
    (GeneratorKind.K, (0.05,), 0),
    (GeneratorKind.BS_THETA, (0.6, 0.3), 0),
    (GeneratorKind.BS_PHI, (0.6, 0.3), 1),
]


class GatesSuite(VerificationSuite):
    suite_id = "gates"
    description = "Gate unitarity, closed-form orbits, Heisenberg action and derivatives"

    def run(self, ctx: VerifyContext) -> List[CheckResult]:
        c = VC.GATE_CUTOFF
        low = np.arange(11)
        checks = []

        single: List[Tuple[str, Callable[[], np.ndarray]]] = [
            ("D(1)", lambda: displacement(1.0, c).data),
            ("S(1)", lambda: squeeze(1.0, c).data),
        ]
        for label, build in single:
            error = _restricted_unitarity(build(), low)
            checks.append(self.at_most(f"{label} column norms (n <= 10)", error, 1e-6))
        pairs = (low[:, None] * c + low[None, :]).ravel()
        checks.append(
            self.at_most(
                "BS(1, 0.3) column norms (n_A, n_B <= 10)",
                _restricted_unitarity(beamsplitter_by_angle(1.0, 0.3, c).data, pairs),
                1e-6,
            )
        )

        identity_error = max(
            float(np.max(np.abs(displacement(0.0, c).data - np.eye(c)))),
            float(np.max(np.abs(squeeze(0.0, c).data - np.eye(c)))),
            float(np.max(np.abs(beamsplitter_by_angle(0.0, 0.0, 8).data - np.eye(64)))),
        )
        checks.append(self.at_most("zero-parameter gates are the identity", identity_error, 1e-12))

        alpha = 0.5 + 0.2j
        orbit = vacuum_orbit([displacement(alpha, c)], c).amplitudes
        checks.append(
            self.at_most(
                "D(alpha)|0> vs coherent amplitudes",
                float(np.max(np.abs(orbit - make_coherent(alpha, c).amplitudes))),
                VC.GATE_ORACLE_TOL,
            )
        )
        orbit = vacuum_orbit([squeeze(0.1, c)], c).amplitudes
        checks.append(
            self.at_most(
                "S(r)|0> vs squeezed vacuum amplitudes",
                float(np.max(np.abs(orbit - make_squeezed_vacuum(0.1, c).amplitudes))),
                VC.GATE_ORACLE_TOL,
            )
        )

        eta = 0.3
        u = beamsplitter_by_transmissivity(eta, 6).data
        column = u[:, 1 * 6 + 0]
        checks.append(
            self.at_most(
                "BS(eta)|1,0> transmission probability",
                abs(abs(column[1 * 6 + 0]) ** 2 - eta),
                1e-12,
            )
        )

        checks.append(self._heisenberg_check(12, 0.7, 0.4))
        checks.extend(self._derivative_checks(8))
        return checks

    def _heisenberg_check(self, cutoff: int, theta: float, phi: float) -> CheckResult:
        """U a U† = cos θ a + e^{−iφ} sin θ b on every column with n_A + n_B <= c − 1."""
        ops = ladder_ops(cutoff)
        identity = np.eye(cutoff)
        a, b = np.kron(ops.a, identity), np.kron(identity, ops.a)
        u = beamsplitter_by_angle(theta, phi, cutoff).data
        moved = u @ a @ u.conj().T
        expected = np.cos(theta) * a + np.exp(-1j * phi) * np.sin(theta) * b
        levels = np.arange(cutoff)
        complete = ((levels[:, None] + levels[None, :]) <= cutoff - 1).ravel()
        error = float(np.max(np.abs((moved - expected)[:, complete])))
        return self.at_most(
            "beamsplitter Heisenberg action", error, 1e-8, f"c={cutoff}, theta={theta}, phi={phi}"
        )

    def _derivative_checks(self, cutoff: int) -> List[CheckResult]:
        step = VC.GENERATOR_FD_STEP
        checks = []
        for kind, params, slot in _DERIVATIVE_CASES:
            _, derivative = gate_derivative(kind, params, cutoff)
            up, down = _perturbed_exponents(kind, params, slot, step, cutoff)
            estimate = (expm(up) - expm(down)) / (2.0 * step)
            checks.append(
                self.at_most(
                    f"d{kind.value} vs finite difference",
                    float(np.max(np.abs(estimate - derivative))),
                    VC.GENERATOR_FD_TOL,
                )
            )
        return checks
