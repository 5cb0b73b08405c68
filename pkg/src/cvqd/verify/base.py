"""
Verification Suite Interface

Every ``cvqd verify`` suite inherits from VerificationSuite and returns one
CheckResult per check: a measured number, the bound it is held to and whether
it passed. A suite never raises on a failed check; the caller decides what a
failure means (exit code 3 on the command line).

Fault injection lives in VerifyContext. Suites that exercise the forward
process take their schedules through ``VerifyContext.schedule`` so an injected
fault reaches every direct-jump computation they make.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from cvqd.constants import VerifyConstants as VC
from cvqd.exceptions import ConfigError
from cvqd.models.checkpoint import CheckResult
from cvqd.models.states import DensityMatrix
from cvqd.physics.diffusion import NoiseSchedule


@dataclass(frozen=True)
class VerifyContext:
    """
    Shared inputs of a verification run.

    Attributes:
        fault: Name of an injected fault (see VerifyConstants.FAULTS), or None
        seed: Seed for the random cases each suite draws
    """

    fault: Optional[str] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.fault is not None and self.fault not in VC.FAULTS:
            raise ConfigError(f"Unknown fault '{self.fault}', expected one of {list(VC.FAULTS)}")

    def rng(self, stream: int = 0) -> np.random.Generator:
        """Generator for one suite; distinct streams never share draws."""
        return np.random.default_rng([self.seed, stream])

    def schedule(self, schedule: NoiseSchedule) -> NoiseSchedule:
        """The schedule a direct jump should use, with the fault applied if any."""
        if self.fault != "eta-bar":
            return schedule
        scale = np.full(schedule.eta_bar.shape, VC.FAULT_ETA_BAR_SCALE)
        scale[0] = 1.0
        return schedule.with_eta_bar(schedule.eta_bar * scale)


class VerificationSuite(ABC):
    """
    Abstract base for a group of numerical checks.

    Usage Example:
        class FockSuite(VerificationSuite):
            suite_id = "fock"
            description = "State preparation and truncation"

            def run(self, ctx):
                return [self.at_most("vacuum trace error", abs(1 - trace), 1e-12)]
    """

    suite_id: str = ""
    description: str = ""

    @abstractmethod
    def run(self, ctx: VerifyContext) -> List[CheckResult]:
        """Run every check of the suite."""

    def at_most(self, name: str, measured: float, bound: float, detail: str = "") -> CheckResult:
        """Check that measured <= bound (NaN fails)."""
        measured = float(measured)
        return CheckResult(
            suite=self.suite_id,
            name=name,
            measured=measured,
            bound=float(bound),
            passed=bool(measured <= bound),
            detail=detail,
        )

    def at_least(self, name: str, measured: float, bound: float, detail: str = "") -> CheckResult:
        """Check that measured >= bound (NaN fails)."""
        measured = float(measured)
        return CheckResult(
            suite=self.suite_id,
            name=name,
            measured=measured,
            bound=float(bound),
            passed=bool(measured >= bound),
            detail=detail,
        )

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__} id={self.suite_id}>"


def random_density(
    rng: np.random.Generator, cutoff: int, rank: Optional[int] = None
) -> DensityMatrix:
    """Random unit-trace state G G† / tr from a complex Gaussian cutoff×rank matrix."""
    rank = cutoff if rank is None else rank
    g = rng.normal(size=(cutoff, rank)) + 1j * rng.normal(size=(cutoff, rank))
    data = g @ g.conj().T
    data = 0.5 * (data + data.conj().T)
    return DensityMatrix(data / np.trace(data).real, cutoff)
