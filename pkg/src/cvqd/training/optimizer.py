"""
Adam with exponentially decaying learning rate.
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from cvqd.constants import TrainerConstants as TC
from cvqd.exceptions import ConfigError


@dataclass(frozen=True)
class AdamState:
    """
    First/second moment estimates of Adam.

    Attributes:
        m: First-moment estimate
        v: Second-moment estimate (non-negative)
        step: Number of updates applied so far
    """

    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = field(default=TC.ADAM_BETA1)
    beta2: float = field(default=TC.ADAM_BETA2)
    eps: float = field(default=TC.ADAM_EPS)

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(np.zeros(size), np.zeros(size))


def adam_update(
    state: AdamState, theta: np.ndarray, grad: np.ndarray, lr: float
) -> Tuple[np.ndarray, AdamState]:
    """
    One bias-corrected Adam step.

    Args:
        state: Moments before the step
        theta: Current parameters
        grad: Gradient of the loss at theta
        lr: Learning rate for this step

    Returns:
        (updated parameters, updated state)

    Raises:
        ConfigError: On mismatched shapes
    """
    theta = np.asarray(theta, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if not (theta.shape == grad.shape == state.m.shape == state.v.shape):
        raise ConfigError(
            f"Adam shapes differ: theta {theta.shape}, grad {grad.shape}, state {state.m.shape}"
        )
    step = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1**step)
    v_hat = v / (1.0 - state.beta2**step)
    updated = theta - lr * m_hat / (np.sqrt(v_hat) + state.eps)
    new_state = AdamState(m, v, step, state.beta1, state.beta2, state.eps)
    return updated, new_state


def lr_at(iteration: int, lr0: float, decay_steps: float, decay_rate: float) -> float:
    """
    Learning rate lr0 · decay_rate^(iteration / decay_steps), continuous exponent.

    Example:
        >>> lr_at(8, 0.00778, 8, 0.9427)
        0.0073342...
    """
    if iteration < 0:
        raise ConfigError(f"Iteration must be >= 0, got {iteration}")
    if decay_steps <= 0:
        raise ConfigError(f"decay_steps must be positive, got {decay_steps}")
    return float(lr0 * decay_rate ** (iteration / decay_steps))
