"""Central finite-difference check of hand-derived gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np


if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from cutmpc.cut_types import FloatArray


@dataclass(frozen=True, slots=True)
class GradientSample:
    name: str
    index: tuple[int, ...]
    analytic: float
    numeric: float

    @property
    def relative_error(self) -> float:
        scale = max(abs(self.analytic), abs(self.numeric), 1e-6)
        return abs(self.analytic - self.numeric) / scale


def check_gradients(
    loss_fn: Callable[[], float],
    arrays: dict[str, FloatArray],
    grads: dict[str, FloatArray],
    *,
    n_samples: int = 20,
    names: Sequence[str] | None = None,
    h: float = 1e-5,
    seed: int = 0,
) -> list[GradientSample]:
    """Compare analytic gradients with central differences on random coordinates.

    ``loss_fn`` must read ``arrays`` when called; each sampled entry is perturbed in
    place and restored afterwards.

    Args:
        loss_fn: Loss evaluated on the current contents of ``arrays``
        arrays: Parameters, perturbed in place
        grads: Analytic gradients with the same keys and shapes
        n_samples: Coordinates sampled per name
        names: Parameter names to check, all gradient keys by default
        h: Finite-difference step
        seed: Seed of the coordinate choice
    """
    rng = np.random.default_rng(seed)
    samples = []
    for name in names if names is not None else sorted(grads):
        target = arrays[name]
        for _ in range(n_samples):
            index = tuple(int(rng.integers(n)) for n in target.shape)
            original = target[index]
            target[index] = original + h
            plus = loss_fn()
            target[index] = original - h
            minus = loss_fn()
            target[index] = original
            samples.append(
                GradientSample(name, index, float(grads[name][index]), (plus - minus) / (2 * h))
            )
    return samples


def max_relative_error(samples: Sequence[GradientSample]) -> float:
    return max((s.relative_error for s in samples), default=0.0)
