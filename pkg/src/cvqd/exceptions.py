"""
Exception hierarchy for CVQD.

Every error derives from ``CvqdError`` (itself a ``ValueError``) and carries
the exit code the CLI reports for it.
"""

from cvqd.constants import RuntimeConstants as RC


class CvqdError(ValueError):
    """Base class for all CVQD errors."""

    exit_code: int = RC.EXIT_PHYSICS


class ConfigError(CvqdError):
    """Invalid or incomplete configuration."""

    exit_code = RC.EXIT_CONFIG


class StateFormatError(CvqdError):
    """Malformed user-supplied state document."""

    exit_code = RC.EXIT_CONFIG


class OutOfCutoff(CvqdError):
    """A Fock level at or above the cutoff was requested."""


class CutoffTooSmall(CvqdError):
    """A state carries too much population near the truncation edge."""


class DegenerateState(CvqdError):
    """A state could not be normalized (zero norm or zero trace)."""


class InvalidState(CvqdError):
    """A matrix violates the density-matrix invariants."""


class NotPSD(CvqdError):
    """A Hermitian matrix has a significantly negative eigenvalue."""


class NonFiniteMatrix(CvqdError):
    """A matrix contains NaN or infinite entries."""


class VerificationFailed(CvqdError):
    """One or more verification checks exceeded their bound."""


class CheckpointFormatError(CvqdError):
    """Corrupted checkpoint or unsupported checkpoint version."""

    exit_code = RC.EXIT_IO


class StorageError(CvqdError):
    """File could not be read or written."""

    exit_code = RC.EXIT_IO
