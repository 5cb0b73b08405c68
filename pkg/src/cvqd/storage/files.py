"""
Atomic file writes and CSV tables.

Every file is written to a temporary sibling and moved into place with
``os.replace``, so a reader never sees a half-written file.
"""

import csv
import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

from cvqd.exceptions import StorageError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_float(value: Any) -> str:
    """17-significant-digit rendering of floats; other values pass through str()."""
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_bytes_atomic(path: PathLike, payload: bytes) -> Path:
    """
    Write payload to path via a temporary file and os.replace.

    Raises:
        StorageError: If the directory cannot be created or the write fails
    """
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(payload)
            os.replace(tmp_name, target)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
    except OSError as e:
        raise StorageError(f"Cannot write {target}: {e}") from e
    logger.debug(f"Wrote {len(payload)} bytes to {target}")
    return target


def write_text_atomic(path: PathLike, text: str) -> Path:
    return write_bytes_atomic(path, text.encode("utf-8"))


def write_json(path: PathLike, document: Any) -> Path:
    """JSON with floats in their shortest round-trip form, trailing newline."""
    return write_text_atomic(path, json.dumps(document, indent=2) + "\n")


def read_json(path: PathLike) -> Any:
    """
    Raises:
        StorageError: If the file is missing or not valid JSON
    """
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise StorageError(f"Cannot read JSON from {path}: {e}") from e


def write_csv(path: PathLike, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """
    CSV with a header row, LF line endings and .17g floats.

    Example:
        >>> write_csv("curve.csv", ("t", "fidelity_vs_target"), [(0, 0.5)])
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise StorageError(f"Row {row!r} does not match columns {columns}")
        writer.writerow([format_float(value) for value in row])
    return write_text_atomic(path, buffer.getvalue())


def read_csv(path: PathLike) -> list[dict[str, str]]:
    """Rows of a CSV file keyed by header."""
    try:
        with open(path, encoding="utf-8", newline="") as handle:
            return list(csv.DictReader(handle))
    except OSError as e:
        raise StorageError(f"Cannot read CSV {path}: {e}") from e
