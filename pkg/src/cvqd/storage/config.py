"""
Config loading: profile defaults ← TOML file ← command-line overrides.

Config files are flat TOML whose keys are the hyperparameter names accepted by
``TrainConfig`` (``cutoff_dim``, ``eta_0``, ``lambda``, ``epochs``, ...).
"""

import logging

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from pydantic import ValidationError

from cvqd.constants import PROFILES, Role
from cvqd.exceptions import ConfigError
from cvqd.models.config import TrainConfig

logger = logging.getLogger(__name__)

DEFAULT_PROFILE = "desk"


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Parse a flat TOML config.

    Raises:
        ConfigError: If the file is missing, not TOML, or contains tables
    """
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {path}") from e
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"Cannot parse config {path}: {e}") from e
    nested = [key for key, value in data.items() if isinstance(value, dict)]
    if nested:
        raise ConfigError(f"Config {path} must be flat; found tables {nested}")
    return data


def profile_defaults(role: Union[Role, str], profile: str = DEFAULT_PROFILE) -> Dict[str, Any]:
    """
    Raises:
        ConfigError: For an unknown role or profile name
    """
    role_key = Role(role).value
    profiles = PROFILES[role_key]
    if profile not in profiles:
        raise ConfigError(f"Unknown profile '{profile}', expected one of {sorted(profiles)}")
    return dict(profiles[profile])


def _format_validation_error(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(piece) for piece in item["loc"]) or "<config>"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


def build_config(values: Mapping[str, Any]) -> TrainConfig:
    """
    Validate a merged key/value mapping.

    Raises:
        ConfigError: With the failing field paths when validation fails
    """
    try:
        return TrainConfig.model_validate(dict(values))
    except ValidationError as e:
        message = _format_validation_error(e)
        logger.error(f"Invalid configuration: {message}")
        raise ConfigError(f"Invalid configuration: {message}") from e


def load_config(
    path: Optional[Union[str, Path]],
    role: Union[Role, str],
    profile: str = DEFAULT_PROFILE,
    overrides: Optional[Mapping[str, Any]] = None,
) -> TrainConfig:
    """
    Merge profile defaults, the file and overrides, then validate.

    Args:
        path: TOML config file, or None for the profile alone
        role: Which profile family supplies defaults
        profile: "desk" or "paper"
        overrides: Values that win over the file (e.g. --seed); None entries ignored

    Example:
        >>> cfg = load_config("configs/desk.toml", "generative", overrides={"seed": 3})
        >>> cfg.cutoff, cfg.seed
        (8, 3)
    """
    merged = profile_defaults(role, profile)
    if path is not None:
        merged.update(read_config_file(path))
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    config = build_config(merged)
    logger.debug(f"Loaded config (profile={profile}, file={path}): {config.to_file_dict()}")
    return config
