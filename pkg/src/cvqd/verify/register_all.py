"""
Register every verification suite.

Call register_all_suites() before running ``cvqd verify``. Registration is
idempotent: suites already present are left alone.
"""

import logging

logger = logging.getLogger(__name__)


def register_all_suites() -> None:
    """Register the built-in suites with the global registry, in run order."""
    from cvqd.verify.diffusion_suites import ChannelSuite, DirectJumpSuite, VarianceLawSuite
    from cvqd.verify.gradient_suite import GradientsSuite
    from cvqd.verify.registry import suite_registry
    from cvqd.verify.state_suites import FidelitySuite, FockSuite, GatesSuite

    suites = (
        FockSuite(),
        FidelitySuite(),
        GatesSuite(),
        ChannelSuite(),
        DirectJumpSuite(),
        VarianceLawSuite(),
        GradientsSuite(),
    )
    for suite in suites:
        if suite_registry.get_suite(suite.suite_id) is not None:
            continue
        try:
            suite_registry.register(suite)
        except ValueError as e:
            logger.error(f"Failed to register suite {suite.suite_id}: {e}", exc_info=True)

    logger.debug(f"Suite registration complete: {len(suite_registry)} suite(s) available")
