"""
Suites for the forward process.

Every direct jump in these suites goes through ``VerifyContext.schedule`` so
that an injected eta-bar fault is visible to them; the sequential references
apply per-step transmissivities and never see the fault.
"""

import logging
from typing import Dict, List

import numpy as np

from cvqd.constants import DiffusionConstants as DC
from cvqd.constants import VerifyConstants as VC
from cvqd.models.checkpoint import CheckResult
from cvqd.models.states import DensityMatrix
from cvqd.physics.diffusion import (
    Environment,
    diffuse_to,
    linear_schedule,
    schedule_from_etas,
    thermal_loss_step,
)
from cvqd.physics.fock import (
    fidelity,
    make_coherent,
    make_thermal,
    quadrature_mean,
    quadrature_variance,
    renormalize,
    trace_distance,
)
from cvqd.verify.base import VerificationSuite, VerifyContext

logger = logging.getLogger(__name__)


class ChannelSuite(VerificationSuite):
    suite_id = "channel"
    description = "Thermal loss channel limits, moments, trace and direct jumps"

    def run(self, ctx: VerifyContext) -> List[CheckResult]:
        c = 20
        env = Environment(0.5)
        alpha = 0.7 * np.exp(0.4j)
        rho = make_coherent(alpha, c).to_density()
        checks = []

        unchanged = thermal_loss_step(rho, 1.0, env)
        checks.append(
            self.at_most("eta = 1 is the identity", trace_distance(unchanged, rho), 1e-10)
        )
        emptied = thermal_loss_step(rho, 0.0, env)
        checks.append(
            self.at_least(
                "eta = 0 gives the thermal state",
                fidelity(emptied, renormalize(make_thermal(env.nbar, c))),
                1.0 - 1e-8,
            )
        )

        half = thermal_loss_step(rho, 0.5, env)
        checks.append(
            self.at_most("trace leakage at eta = 0.5", rho.trace - half.trace, DC.LEAK_TOL)
        )
        smallest = float(np.linalg.eigvalsh(half.data)[0])
        checks.append(self.at_least("output is positive semidefinite", smallest, -1e-9))

        for eta in (0.3, 0.6, 0.9):
            out = thermal_loss_step(rho, eta, env)
            error = max(
                abs(quadrature_mean(out, q) - np.sqrt(eta) * quadrature_mean(rho, q))
                for q in ("x", "p")
            )
            checks.append(
                self.at_most(f"first moments scale by sqrt(eta={eta})", error, DC.FIRST_MOMENT_TOL)
            )

        checks.append(
            self.at_most(
                "environment tail mass at c = 15",
                1.0 - make_thermal(env.nbar, 15).trace,
                1e-5,
                "population of the thermal state beyond the cutoff",
            )
        )

        schedule = linear_schedule(0.99, 0.9, 8)
        jumped = ctx.schedule(schedule)
        for t in (1, 4, 8):
            direct = diffuse_to(rho, t, jumped, env)
            product = thermal_loss_step(rho, float(np.prod(schedule.eta[:t])), env)
            checks.append(
                self.at_most(
                    f"direct jump to t={t} uses the product transmissivity",
                    trace_distance(direct, product),
                    1e-12,
                )
            )

        pure_loss = Environment(0.0)
        constant = schedule_from_etas([0.9] * 10)
        fidelities = [
            fidelity(rho, diffuse_to(rho, t, ctx.schedule(constant), pure_loss))
            for t in range(constant.total_timesteps + 1)
        ]
        rises = float(np.max(np.diff(fidelities)))
        checks.append(
            self.at_most("fidelity to the input never increases along t", rises, 1e-12)
        )
        return checks


class DirectJumpSuite(VerificationSuite):
    """
    Random schedules applied step by step against one jump with eta_bar.

    Each case draws a schedule of 1..6 steps with eta_i in [0.7, 1] and a
    coherent input with |alpha| <= 1.
    """

    suite_id = "theorem1"
    description = "Sequential thermal loss steps agree with one direct jump"

    def run(self, ctx: VerifyContext) -> List[CheckResult]:
        rng = ctx.rng(3)
        worst: Dict[float, float] = {nbar: 0.0 for nbar in VC.DIRECT_JUMP_NBARS}
        for case in range(VC.DIRECT_JUMP_CASES):
            nbar = VC.DIRECT_JUMP_NBARS[case % len(VC.DIRECT_JUMP_NBARS)]
            distance = self._case(ctx, rng, nbar, VC.DIRECT_JUMP_CUTOFF)
            worst[nbar] = max(worst[nbar], distance)

        wide = 0.0
        for _ in range(VC.DIRECT_JUMP_WIDE_CASES):
            wide = max(wide, self._case(ctx, rng, 0.5, VC.DIRECT_JUMP_WIDE_CUTOFF))

        c = VC.DIRECT_JUMP_CUTOFF
        checks = []
        for nbar, distance in worst.items():
            bound = DC.DIRECT_JUMP_TOL if nbar == 0.0 else DC.DIRECT_JUMP_TRUNCATED_ENV_TOL
            checks.append(
                self.at_most(
                    f"max trace distance, nbar={nbar}, c={c}",
                    distance,
                    bound,
                    f"{VC.DIRECT_JUMP_CASES // len(worst)} random cases",
                )
            )
        checks.append(
            self.at_most(
                f"max trace distance, nbar=0.5, c={VC.DIRECT_JUMP_WIDE_CUTOFF}",
                wide,
                DC.DIRECT_JUMP_TOL,
                f"{VC.DIRECT_JUMP_WIDE_CASES} random cases",
            )
        )
        return checks

    def _case(
        self, ctx: VerifyContext, rng: np.random.Generator, nbar: float, cutoff: int
    ) -> float:
        steps = int(rng.integers(1, VC.DIRECT_JUMP_MAX_STEPS + 1))
        etas = rng.uniform(VC.DIRECT_JUMP_ETA_MIN, 1.0, steps)
        alpha = rng.uniform(0.0, 1.0) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
        env = Environment(nbar)
        rho0 = make_coherent(alpha, cutoff).to_density()

        sequential: DensityMatrix = rho0
        for eta in etas:
            sequential = thermal_loss_step(sequential, float(eta), env)
        direct = diffuse_to(rho0, steps, ctx.schedule(schedule_from_etas(etas)), env)
        distance = trace_distance(sequential, direct)
        logger.debug(
            f"direct jump case: steps={steps}, |alpha|={abs(alpha):.3f}, nbar={nbar}, "
            f"c={cutoff}, distance={distance:.3e}"
        )
        return distance


class VarianceLawSuite(VerificationSuite):
    """Quadrature variance after loss: 1/2 + (1 − eta) nbar for a coherent input."""

    suite_id = "variance_law"
    description = "Quadrature variance after one thermal loss channel"

    def run(self, ctx: VerifyContext) -> List[CheckResult]:
        c = VC.VARIANCE_LAW_CUTOFF
        nbar = VC.VARIANCE_LAW_NBAR
        env = Environment(nbar)
        rho = make_coherent(VC.VARIANCE_LAW_ALPHA, c).to_density()
        checks = []
        for eta in VC.VARIANCE_LAW_ETAS:
            out = diffuse_to(rho, 1, ctx.schedule(schedule_from_etas([eta])), env)
            expected = 0.5 + (1.0 - eta) * nbar
            error = max(abs(quadrature_variance(out, q) - expected) for q in ("x", "p"))
            checks.append(self.at_most(f"variance at eta={eta}", error, DC.VARIANCE_LAW_TOL))

        # The law composes: after t steps the excess is (1 - eta_bar_t) nbar.
        schedule = linear_schedule(0.95, 0.8, 5)
        chained = rho
        for t in range(1, schedule.total_timesteps + 1):
            chained = thermal_loss_step(chained, schedule.eta_at(t), env)
        expected = 0.5 + (1.0 - schedule.eta_bar_at(schedule.total_timesteps)) * nbar
        checks.append(
            self.at_most(
                "variance after five sequential steps",
                abs(quadrature_variance(chained, "x") - expected),
                DC.VARIANCE_LAW_TOL,
            )
        )
        return checks
