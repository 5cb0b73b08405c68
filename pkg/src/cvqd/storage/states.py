"""
State JSON documents: {version, modes, cutoff, data: [[re, im], ...]}.
"""

import logging
from pathlib import Path
from typing import Union

from pydantic import ValidationError

from cvqd.exceptions import InvalidState, StateFormatError, StorageError
from cvqd.models.checkpoint import StateDocument
from cvqd.models.states import DensityMatrix
from cvqd.storage.files import read_json, write_json

logger = logging.getLogger(__name__)


def save_state(path: Union[str, Path], rho: DensityMatrix) -> Path:
    """Write a density matrix as a state document."""
    document = StateDocument.from_density(rho)
    return write_json(path, document.model_dump(mode="json"))


def load_state(path: Union[str, Path]) -> DensityMatrix:
    """
    Read a state document.

    Raises:
        StateFormatError: If the file is unreadable, not JSON, does not match
            the document schema, or holds an invalid density matrix
    """
    try:
        raw = read_json(path)
    except StorageError as e:
        raise StateFormatError(f"Cannot read state file {path}: {e}") from e
    try:
        rho = StateDocument.model_validate(raw).to_density()
        rho.check()
    except (ValidationError, InvalidState) as e:
        raise StateFormatError(f"Malformed state file {path}: {e}") from e
    logger.debug(f"Loaded {rho.modes}-mode state at cutoff {rho.cutoff} from {path}")
    return rho
