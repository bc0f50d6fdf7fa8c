"""RMSprop with a fixed learning rate, elementwise over named tensors.

Update rule per tensor::

    v <- decay * v + (1 - decay) * g**2
    p <- p - lr * g / (sqrt(v) + epsilon)

The accumulator ``v`` starts at zero and stays non-negative. Steps are
fully deterministic: identical state and gradients give identical
updates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ValidationError
from .model import ModelParams


@dataclass
class OptState:
    """Per-tensor squared-gradient accumulators plus the hyperparameters."""

    learning_rate: float = 0.001
    decay: float = 0.9
    epsilon: float = 1e-8
    seed: int = 0
    accum: dict[str, np.ndarray] = field(default_factory=dict)


def init_opt_state(
    params: ModelParams,
    learning_rate: float = 0.001,
    decay: float = 0.9,
    epsilon: float = 1e-8,
    seed: int = 0,
) -> OptState:
    if learning_rate <= 0:
        raise ValidationError("learning_rate must be positive")
    if not (0.0 <= decay < 1.0):
        raise ValidationError("decay must lie in [0, 1)")
    return OptState(
        learning_rate=learning_rate,
        decay=decay,
        epsilon=epsilon,
        seed=seed,
        accum={name: np.zeros_like(arr) for name, arr in params.tensors()},
    )


def rmsprop_step(
    opt: OptState, params: ModelParams, grads: dict[str, np.ndarray]
) -> tuple[ModelParams, OptState]:
    """Apply one update in place; returns the same (params, opt) pair."""
    for name, grad in grads.items():
        v = opt.accum[name]
        p = getattr(params, name)
        if grad.shape != p.shape:
            raise ValidationError(
                f"gradient for {name} has shape {grad.shape}, expected {p.shape}"
            )
        v *= opt.decay
        v += (1.0 - opt.decay) * grad * grad
        p -= opt.learning_rate * grad / (np.sqrt(v) + opt.epsilon)
    return params, opt
