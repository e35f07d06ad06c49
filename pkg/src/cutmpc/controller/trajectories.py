"""Desired trajectories of the data-collection controller.

The cutting axis follows a minimum-jerk quintic descent, the sawing axis a
triangular wave about the sawing center.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from cutmpc.errors import ConfigurationError
from cutmpc.helpers import vec2


if TYPE_CHECKING:
    from cutmpc.cut_types import FloatArray


def quintic_descent(t: float, duration: float, z0: float, z1: float) -> tuple[float, float]:
    """Minimum-jerk transition from ``z0`` to ``z1``.

    Times outside ``[0, duration]`` are clamped to the endpoints.

    Returns:
        Position and velocity at ``t``.

    Raises:
        ConfigurationError: If the duration is not positive
    """
    if duration <= 0:
        msg = f"Descent duration must be positive, got {duration}"
        raise ConfigurationError(msg)
    s = min(1.0, max(0.0, t / duration))
    delta = z1 - z0
    z = z0 + delta * (10 * s**3 - 15 * s**4 + 6 * s**5)
    zdot = delta / duration * (30 * s**2 - 60 * s**3 + 30 * s**4)
    return z, zdot


def triangular_saw(t: float, center: float, range_: float, period: float) -> tuple[float, float]:
    """Triangular wave of peak-to-peak ``range_`` starting at ``center`` moving up.

    At the kinks the slope of the left limit is returned.
    """
    if period <= 0:
        msg = f"Saw period must be positive, got {period}"
        raise ConfigurationError(msg)
    if range_ == 0:
        return center, 0.0
    amplitude = range_ / 2
    slope = 2 * range_ / period
    phase = (t / period) % 1.0
    if phase <= 0.25:
        return center + slope * phase * period, slope
    if phase <= 0.75:
        return center + amplitude - slope * (phase - 0.25) * period, -slope
    return center - amplitude + slope * (phase - 0.75) * period, slope


@dataclass(frozen=True, slots=True)
class DesiredTrajectory:
    """Quintic descent on z combined with triangular sawing on y."""

    z_start: float
    """Height where the descent starts (m)."""

    z_end: float
    """Height where the descent ends (m)."""

    descent_duration: float
    """Duration of the quintic descent (s)."""

    saw_center: float = 0.0
    saw_range: float = 0.0
    saw_period: float = 1.0
    settle_time: float = 0.0
    """Time appended after the descent has finished (s)."""

    f_d: FloatArray = field(default_factory=lambda: np.zeros(2))
    """Desired force F_d (N)."""

    def __post_init__(self) -> None:
        object.__setattr__(self, "f_d", vec2(self.f_d))
        if self.descent_duration <= 0 or self.saw_period <= 0:
            msg = "Descent duration and saw period must be positive"
            raise ConfigurationError(msg)
        if self.saw_range < 0 or self.settle_time < 0:
            msg = "Saw range and settle time must be non-negative"
            raise ConfigurationError(msg)

    @property
    def duration(self) -> float:
        return self.descent_duration + self.settle_time

    @property
    def descent_depth(self) -> float:
        return self.z_start - self.z_end

    def at(self, t: float) -> tuple[FloatArray, FloatArray]:
        """Desired position and velocity (y, z) at time ``t``."""
        y, ydot = triangular_saw(t, self.saw_center, self.saw_range, self.saw_period)
        z, zdot = quintic_descent(t, self.descent_duration, self.z_start, self.z_end)
        return np.array([y, z]), np.array([ydot, zdot])
