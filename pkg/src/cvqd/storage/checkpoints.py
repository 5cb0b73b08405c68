"""
Checkpoint persistence.

Checkpoints are JSON. Python's float repr is the shortest string that parses
back to the same double, so save → load is bit-exact. Files from another
format version are refused, never migrated.
"""

import logging
from pathlib import Path
from typing import Optional, Union

from pydantic import ValidationError

from cvqd.constants import Role
from cvqd.exceptions import CheckpointFormatError, StorageError
from cvqd.models.checkpoint import Checkpoint, TrainingSummary
from cvqd.models.config import TargetSpec, TrainConfig
from cvqd.physics.denoiser import ThetaVector
from cvqd.storage.files import read_json, write_json

logger = logging.getLogger(__name__)


def make_checkpoint(
    role: Role,
    cfg: TrainConfig,
    theta: ThetaVector,
    target: Optional[TargetSpec] = None,
    summary: Optional[TrainingSummary] = None,
) -> Checkpoint:
    """Assemble a checkpoint from a trained parameter vector."""
    return Checkpoint(
        role=role,
        cfg=cfg,
        theta=[float(value) for value in theta.values],
        target=target,
        summary=summary,
    )


def checkpoint_save(path: Union[str, Path], checkpoint: Checkpoint) -> Path:
    """Write a checkpoint atomically."""
    document = checkpoint.model_dump(mode="json", by_alias=True)
    written = write_json(path, document)
    logger.info(f"Checkpoint written to {written}")
    return written


def checkpoint_load(path: Union[str, Path], role: Optional[Role] = None) -> Checkpoint:
    """
    Read and validate a checkpoint.

    Args:
        path: Checkpoint file
        role: Required role, if the caller needs a specific one

    Raises:
        CheckpointFormatError: If the file is unreadable, corrupted, has another
            format version or layout, or has the wrong role
    """
    try:
        raw = read_json(path)
    except StorageError as e:
        raise CheckpointFormatError(f"Cannot read checkpoint {path}: {e}") from e
    try:
        checkpoint = Checkpoint.model_validate(raw)
    except ValidationError as e:
        raise CheckpointFormatError(f"Invalid checkpoint {path}: {e}") from e
    if role is not None and checkpoint.role is not role:
        raise CheckpointFormatError(
            f"Checkpoint {path} has role '{checkpoint.role.value}', expected '{role.value}'"
        )
    return checkpoint


def checkpoint_theta(checkpoint: Checkpoint) -> ThetaVector:
    """Parameter vector stored in a checkpoint."""
    return ThetaVector(checkpoint.theta, checkpoint.cfg.layers)
