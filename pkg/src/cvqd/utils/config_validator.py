"""
Configuration consistency validation.

The hyperparameter profiles in constants.py are plain dictionaries; this
module checks that they validate as ``TrainConfig`` and agree with the
schedule and cutoff constants they are derived from.
"""

import logging
from typing import List

from cvqd.constants import (
    COHERENT_ALPHA25_TUNED_PROFILE,
    GENERATIVE_FULL_PROFILE,
    PROFILES,
    RESTORATION_FULL_PROFILE,
    TargetKind,
)
from cvqd.constants import DiffusionConstants as DC
from cvqd.exceptions import ConfigError, CutoffTooSmall
from cvqd.models.config import TargetSpec
from cvqd.physics.targets import prepare_target
from cvqd.storage.config import build_config

logger = logging.getLogger(__name__)

NOISE_KEYS = ("eta_0", "eta_T", "beta_start", "beta_end")


def _check_profiles_build(errors: List[str]) -> None:
    for role, profiles in PROFILES.items():
        for name, values in profiles.items():
            try:
                build_config(values)
            except ConfigError as e:
                errors.append(f"{role}/{name} does not validate: {e}")
    try:
        build_config(COHERENT_ALPHA25_TUNED_PROFILE)
    except ConfigError as e:
        errors.append(f"tuned alpha=2.5 profile does not validate: {e}")


def _check_full_scale_noise(errors: List[str]) -> None:
    expected = {
        "eta_0": DC.FULL_SCALE_ETA_0,
        "eta_T": DC.FULL_SCALE_ETA_T,
        "beta_start": DC.FULL_SCALE_BETA_START,
        "beta_end": DC.FULL_SCALE_BETA_END,
    }
    for key in NOISE_KEYS:
        if GENERATIVE_FULL_PROFILE[key] != expected[key]:
            errors.append(
                f"Generative full profile has {key}={GENERATIVE_FULL_PROFILE[key]} "
                f"but DiffusionConstants defines {expected[key]}"
            )
        if RESTORATION_FULL_PROFILE[key] != GENERATIVE_FULL_PROFILE[key]:
            errors.append(
                f"Restoration full profile has {key}={RESTORATION_FULL_PROFILE[key]} "
                f"but the generative full profile uses {GENERATIVE_FULL_PROFILE[key]}"
            )


def _check_cutoffs(errors: List[str]) -> None:
    tuned_cutoff = COHERENT_ALPHA25_TUNED_PROFILE["cutoff_dim"]
    try:
        prepare_target(TargetSpec(kind=TargetKind.COHERENT, alpha=2.5), tuned_cutoff)
    except CutoffTooSmall as e:
        errors.append(f"Tuned profile cutoff {tuned_cutoff} cannot hold |2.5>: {e}")

    for name, values in PROFILES["restoration"].items():
        cutoff, s_max = values["cutoff_dim"], values["s_max"]
        try:
            prepare_target(TargetSpec(kind=TargetKind.COHERENT, alpha=s_max), cutoff)
        except CutoffTooSmall as e:
            errors.append(f"restoration/{name} cutoff {cutoff} cannot hold |s_max={s_max}>: {e}")


def validate_profiles() -> bool:
    """
    Validate that the shipped hyperparameter profiles are consistent.

    Checks that every profile validates as a ``TrainConfig``, that the
    full-scale noise endpoints match ``DiffusionConstants`` and are shared by
    the restoration profile, and that each profile's cutoff holds the largest
    coherent state it trains on.

    Returns:
        True if configuration is consistent

    Raises:
        ConfigError: If configuration inconsistencies are detected
    """
    errors: List[str] = []
    _check_profiles_build(errors)
    _check_full_scale_noise(errors)
    _check_cutoffs(errors)

    if errors:
        error_message = "Configuration inconsistencies detected:\n" + "\n".join(
            f"  - {e}" for e in errors
        )
        logger.error(error_message)
        raise ConfigError(error_message)

    logger.info("Profile configuration validated successfully")
    return True
