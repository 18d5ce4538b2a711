"""Adam with bias correction and learning-rate schedules."""

import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from ..core.errors import ConfigError, NonFiniteGradientError, StructuralError

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


@dataclass
class AdamState:
    """First/second moment estimates per parameter and the step count."""

    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: Dict[str, np.ndarray],
    grads: Dict[str, np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = BETA1,
    beta2: float = BETA2,
    eps: float = EPSILON,
    epoch: int = -1,
) -> Dict[str, np.ndarray]:
    """One Adam update; returns new parameter arrays and advances ``state``.

    Every gradient is checked before any parameter moves, so a failed step
    leaves both parameters and state untouched.

    Raises:
        NonFiniteGradientError: If a gradient holds NaN/Inf (names the parameter)
        StructuralError: If a gradient shape does not match its parameter
    """
    for name, g in grads.items():
        if g.shape != params[name].shape:
            raise StructuralError(
                f"Gradient of '{name}' has shape {g.shape}, "
                f"parameter has {params[name].shape}"
            )
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(name, epoch=epoch, step=state.step + 1)

    state.step += 1
    t = state.step
    correction1 = 1.0 - beta1**t
    correction2 = 1.0 - beta2**t
    updated = {}
    for name, value in params.items():
        g = grads.get(name)
        if g is None:
            updated[name] = value
            continue
        m = state.m.get(name, np.zeros_like(value))
        v = state.v.get(name, np.zeros_like(value))
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        state.m[name] = m
        state.v[name] = v
        m_hat = m / correction1
        v_hat = v / correction2
        updated[name] = value - lr * m_hat / (np.sqrt(v_hat) + eps)
    return updated


def learning_rate(base_lr: float, schedule: str, epoch: int, epochs: int) -> float:
    """Learning rate for ``epoch`` (0-based) out of ``epochs``.

    ``cosine`` decays from base_lr to 0 over the run as
    base_lr · (1 + cos(π·epoch/epochs)) / 2.
    """
    if schedule == "constant":
        return base_lr
    if schedule == "cosine":
        if epochs <= 0:
            return base_lr
        return base_lr * 0.5 * (1.0 + math.cos(math.pi * epoch / epochs))
    raise ConfigError(f"Unknown lr schedule '{schedule}'")
