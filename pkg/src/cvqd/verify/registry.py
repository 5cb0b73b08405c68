"""
Verification Suite Registry

Central registry for the ``cvqd verify`` suites. Suites are registered
explicitly by ``register_all_suites()``; the command line runs a selection of
them against one VerifyContext and collects a VerifyReport.
"""

import logging
from typing import Dict, List, Optional, Sequence

from cvqd.exceptions import ConfigError
from cvqd.models.checkpoint import VerifyReport
from cvqd.verify.base import VerificationSuite, VerifyContext

logger = logging.getLogger(__name__)


class SuiteRegistry:
    """
    Global registry for verification suites, kept in registration order.

    Usage:
        suite_registry.register(FockSuite())
        report = suite_registry.run(["fock"], VerifyContext(fault=None))
    """

    def __init__(self) -> None:
        self._suites: Dict[str, VerificationSuite] = {}
        logger.debug("Suite registry initialized")

    def register(self, suite: VerificationSuite) -> None:
        """
        Register a new suite.

        Raises:
            ValueError: If the suite ID is already registered
        """
        if suite.suite_id in self._suites:
            existing = self._suites[suite.suite_id]
            raise ValueError(
                f"Suite ID '{suite.suite_id}' already registered by {existing.__class__.__name__}"
            )
        self._suites[suite.suite_id] = suite
        logger.debug(f"Registered suite: {suite}")

    def unregister(self, suite_id: str) -> bool:
        """
        Returns:
            True if the suite was removed, False if it was not registered
        """
        if self._suites.pop(suite_id, None) is None:
            return False
        logger.debug(f"Unregistered suite: {suite_id}")
        return True

    def get_suite(self, suite_id: str) -> Optional[VerificationSuite]:
        return self._suites.get(suite_id)

    def list_suites(self) -> List[VerificationSuite]:
        return list(self._suites.values())

    def suite_ids(self) -> List[str]:
        return list(self._suites)

    def run(
        self, selection: Optional[Sequence[str]] = None, ctx: Optional[VerifyContext] = None
    ) -> VerifyReport:
        """
        Run the selected suites (all when selection is empty or None).

        Args:
            selection: Suite IDs in the order to run them
            ctx: Fault and seed shared by every suite

        Returns:
            VerifyReport with every check of every selected suite

        Raises:
            ConfigError: If a selected suite ID is unknown

        Example:
            report = get_registry().run(["theorem1"], VerifyContext(fault="eta-bar"))
            assert not report.passed
        """
        ctx = ctx or VerifyContext()
        chosen = list(selection) if selection else self.suite_ids()
        unknown = [suite_id for suite_id in chosen if suite_id not in self._suites]
        if unknown:
            raise ConfigError(f"Unknown suite(s) {unknown}, expected some of {self.suite_ids()}")

        report = VerifyReport(suites=chosen, fault=ctx.fault)
        for suite_id in chosen:
            logger.info(f"Running suite {suite_id}")
            results = self._suites[suite_id].run(ctx)
            failed = sum(1 for result in results if not result.passed)
            logger.info(f"Suite {suite_id}: {len(results) - failed}/{len(results)} checks passed")
            report.checks.extend(results)
        return report

    def __len__(self) -> int:
        return len(self._suites)

    def __repr__(self) -> str:
        return f"<SuiteRegistry suites={len(self._suites)}>"


# Global singleton registry instance
suite_registry = SuiteRegistry()


def get_registry() -> SuiteRegistry:
    """Global SuiteRegistry singleton."""
    return suite_registry
