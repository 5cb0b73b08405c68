"""
Gradient integrity: analytic and SPSA estimates against central differences.

The check uses a coherent target under pure loss, so every reference state is
pure and the loss is smooth in the parameters; finite differences are then
accurate far below the comparison bound.
"""

import logging
from typing import List

import numpy as np

from cvqd.constants import DenoiserConstants as DNC
from cvqd.constants import VerifyConstants as VC
from cvqd.models.checkpoint import CheckResult
from cvqd.models.config import TrainConfig
from cvqd.physics.denoiser import ThetaVector
from cvqd.physics.diffusion import Environment, linear_schedule
from cvqd.physics.fock import make_coherent
from cvqd.training.gradients import grad_central_fd, grad_spsa, loss_and_grad_analytic
from cvqd.training.losses import LossBatch, batch_loss_fn, build_generative_batch
from cvqd.verify.base import VerificationSuite, VerifyContext

logger = logging.getLogger(__name__)


def gradient_check_config(seed: int = 0) -> TrainConfig:
    """Small generative configuration the gradient checks differentiate."""
    return TrainConfig(
        cutoff=VC.GRADIENT_CUTOFF,
        layers=VC.GRADIENT_LAYERS,
        total_timesteps=10,
        eta0=0.99,
        etaT=0.8,
        nbar=0.0,
        batch_size=3,
        max_iters=1,
        lr0=0.01,
        decay_steps=100,
        decay_rate=0.9,
        lambda_=0.5,
        gamma=10.0,
        seed=seed,
        target="coherent",
        target_alpha=0.5,
    )


def gradient_check_batch(cfg: TrainConfig, rng: np.random.Generator) -> LossBatch:
    """One sampled loss plan for the gradient checks."""
    target = make_coherent(cfg.target_alpha or 0.0, cfg.cutoff).to_density()
    schedule = linear_schedule(cfg.eta0, cfg.etaT, cfg.total_timesteps)
    return build_generative_batch(target, schedule, Environment(cfg.nbar), cfg, rng)


def relative_error(estimate: np.ndarray, reference: np.ndarray) -> float:
    """max |estimate − reference| / max |reference|."""
    scale = float(np.max(np.abs(reference)))
    return float(np.max(np.abs(estimate - reference))) / max(scale, 1e-300)


class GradientsSuite(VerificationSuite):
    suite_id = "gradients"
    description = "Analytic and SPSA gradients against central finite differences"

    def run(self, ctx: VerifyContext) -> List[CheckResult]:
        rng = ctx.rng(4)
        cfg = gradient_check_config(ctx.seed)
        checks = []
        batch = gradient_check_batch(cfg, rng)
        loss_fn = batch_loss_fn(batch, cfg.layers)

        size = DNC.PARAMS_PER_LAYER * cfg.layers
        scale = VC.GRADIENT_PARAM_SCALE
        thetas = [
            ThetaVector(rng.uniform(-scale, scale, size), cfg.layers)
            for _ in range(VC.GRADIENT_CASES)
        ]
        for case, theta in enumerate(thetas):
            diagnostics, analytic = loss_and_grad_analytic(theta, batch)
            numeric = grad_central_fd(loss_fn, theta, VC.GRADIENT_FD_STEP)
            checks.append(
                self.at_most(
                    f"analytic vs central difference, case {case}",
                    relative_error(analytic, numeric),
                    VC.GRADIENT_REL_TOL,
                    f"L={cfg.layers}, c={cfg.cutoff}, loss={diagnostics.loss_total:.6f}",
                )
            )

        theta = thetas[-1]
        numeric = grad_central_fd(loss_fn, theta, VC.GRADIENT_FD_STEP)
        samples = np.array(
            [grad_spsa(loss_fn, theta, cfg.spsa_perturb, rng) for _ in range(VC.SPSA_DIRECTIONS)]
        )
        mean = samples.mean(axis=0)
        standard_error = samples.std(axis=0, ddof=1) / np.sqrt(VC.SPSA_DIRECTIONS)
        checks.append(
            self.at_most(
                "SPSA mean vs central difference (norm)",
                float(np.linalg.norm(mean - numeric)),
                VC.SPSA_STANDARD_ERRORS * float(np.linalg.norm(standard_error)),
                f"{VC.SPSA_DIRECTIONS} Rademacher directions",
            )
        )
        return checks
