"""Validation utilities for CVQD command-line input."""

import math
from typing import List, Optional, Sequence

from cvqd.constants import VerifyConstants as VC
from cvqd.exceptions import ConfigError


def parse_values(text: str, name: str = "values") -> List[float]:
    """
    Parse a comma-separated list of finite floats.

    Args:
        text: e.g. "0.5,1.0, 1.5"
        name: Option name used in error messages

    Returns:
        Parsed values in the given order

    Raises:
        ConfigError: If the list is empty or an entry is not a finite number

    Example:
        >>> parse_values("0.5,1.0")
        [0.5, 1.0]
    """
    entries = [piece.strip() for piece in text.split(",") if piece.strip()]
    if not entries:
        raise ConfigError(f"Invalid {name}: '{text}'. Expected a comma-separated list of numbers")
    values = []
    for entry in entries:
        try:
            value = float(entry)
        except ValueError:
            raise ConfigError(f"Invalid {name} entry: '{entry}' is not a number")
        if not math.isfinite(value):
            raise ConfigError(f"Invalid {name} entry: '{entry}' is not finite")
        values.append(value)
    return values


def validate_transmissivity(eta: float, name: str = "eta") -> float:
    """
    Raises:
        ConfigError: If eta lies outside [0, 1]
    """
    if not 0.0 <= eta <= 1.0:
        raise ConfigError(f"Invalid {name}: {eta}. A transmissivity must lie in [0, 1]")
    return eta


def validate_occupation(nbar: Optional[float], name: str = "nbar") -> Optional[float]:
    """
    Raises:
        ConfigError: If nbar is negative or not finite
    """
    if nbar is not None and (not math.isfinite(nbar) or nbar < 0.0):
        raise ConfigError(f"Invalid {name}: {nbar}. A mean photon number must be >= 0")
    return nbar


def validate_suites(selection: Sequence[str]) -> List[str]:
    """
    Check a verification suite selection, preserving its order and dropping repeats.

    Raises:
        ConfigError: If a suite id is unknown
    """
    unknown = [name for name in selection if name not in VC.SUITES]
    if unknown:
        raise ConfigError(
            f"Unknown verification suite(s): {', '.join(unknown)}. "
            f"Valid suites are: {', '.join(VC.SUITES)}"
        )
    return list(dict.fromkeys(selection))
