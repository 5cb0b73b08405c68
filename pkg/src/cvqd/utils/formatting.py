"""Formatting utilities for CVQD console output."""

from typing import List, Optional

from cvqd.models.checkpoint import CheckResult, VerifyReport
from cvqd.training.trainer import MetricsRow


def format_fidelity(value: Optional[float]) -> str:
    """
    Format a fidelity as a percentage.

    Example:
        >>> format_fidelity(0.99951)
        '99.951%'
    """
    if value is None:
        return "N/A"
    return f"{100.0 * value:.3f}%"


def format_duration(seconds: float) -> str:
    """
    Format a duration in seconds to a short human-readable string.

    Returns:
        e.g. "850ms", "12.3s", "4m 05s", "2h 10m"
    """
    if seconds < 1.0:
        return f"{seconds * 1000:.0f}ms"
    if seconds < 60.0:
        return f"{seconds:.1f}s"
    minutes, secs = divmod(int(round(seconds)), 60)
    if minutes < 60:
        return f"{minutes}m {secs:02d}s"
    hours, minutes = divmod(minutes, 60)
    return f"{hours}h {minutes}m"


def format_check(check: CheckResult) -> str:
    """One verification check: status, name, measured value against its bound."""
    status = "✓" if check.passed else "❌"
    line = f"  {status} {check.name}: {check.measured:.3e} (bound {check.bound:.1e})"
    if check.detail:
        line += f" [{check.detail}]"
    return line


def format_report(report: VerifyReport) -> List[str]:
    """
    Lines of a verification report grouped by suite, ending with a summary.
    """
    lines = []
    if report.fault:
        lines.append(f"⚠️  Injected fault: {report.fault}")
    for suite in report.suites:
        checks = [check for check in report.checks if check.suite == suite]
        passed = sum(1 for check in checks if check.passed)
        lines.append(f"\n📊 {suite}: {passed}/{len(checks)} checks passed")
        lines.extend(format_check(check) for check in checks)
    failures = report.failures
    total = len(report.checks)
    if failures:
        lines.append(f"\n❌ {len(failures)} of {total} checks failed")
    else:
        lines.append(f"\n✓ All {total} checks passed")
    return lines


def format_metrics_row(row: MetricsRow) -> str:
    return (
        f"iter {row.iteration:>5}  lr {row.lr:.2e}  loss {row.loss_total:.6f}  "
        f"mean F {format_fidelity(row.mean_step_fidelity)}  "
        f"penalty {row.mean_trace_penalty:.2e}"
    )
