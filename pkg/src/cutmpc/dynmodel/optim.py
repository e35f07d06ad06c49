"""Stochastic gradient descent with momentum and global-norm clipping."""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import TYPE_CHECKING

import numpy as np


if TYPE_CHECKING:
    from collections.abc import Collection

    from cutmpc.cut_types import FloatArray


def global_norm(grads: dict[str, FloatArray]) -> float:
    return math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))


def clip_by_global_norm(grads: dict[str, FloatArray], threshold: float) -> float:
    """Rescale ``grads`` in place so their global norm is at most ``threshold``.

    Returns:
        The norm before clipping.
    """
    norm = global_norm(grads)
    if norm > threshold:
        scale = threshold / norm
        for g in grads.values():
            g *= scale
    return norm


@dataclass
class MomentumSGD:
    """Classical momentum: ``buf = mu * buf + g`` then ``w -= lr * buf``."""

    learning_rate: float
    momentum: float = 0.9
    grad_clip: float | None = 5.0
    frozen: Collection[str] = ()
    """Parameter names that are never updated."""

    _velocity: dict[str, FloatArray] = field(default_factory=dict, repr=False)

    def step(self, params: dict[str, FloatArray], grads: dict[str, FloatArray]) -> float:
        """Update ``params`` in place from ``grads``; frozen names are masked first.

        Returns:
            The global gradient norm before clipping.
        """
        grads = {k: g for k, g in grads.items() if k not in self.frozen}
        norm = clip_by_global_norm(grads, self.grad_clip) if self.grad_clip else global_norm(grads)
        for name, g in grads.items():
            buf = self._velocity.get(name)
            buf = g.copy() if buf is None else self.momentum * buf + g
            self._velocity[name] = buf
            params[name] -= self.learning_rate * buf
        return norm
