"""Inverse-damping admittance law.

The controller maps the force error to a Cartesian velocity::

    u = K_a (F_s - F_r)                                     (inverse damping)
    F_r = F_d - K_a^-1 (pdot_d - K_p e_p)                    (reference force)

which around an ideal plant realizes ``e_p' + K_p e_p = K_a e_f``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np


if TYPE_CHECKING:
    from cutmpc.controller.gains import Gains
    from cutmpc.controller.trajectories import DesiredTrajectory
    from cutmpc.cut_types import FloatArray


@dataclass(frozen=True, slots=True)
class ForceErrorState:
    """Controller quantities of one step; ``e_p = p - p_d`` and ``e_f = F_s - F_d``."""

    e_p: FloatArray
    e_f: FloatArray
    f_r: FloatArray
    f_s: FloatArray
    u: FloatArray


def reference_force(p: FloatArray, t: float, traj: DesiredTrajectory, gains: Gains) -> FloatArray:
    """Reference force that makes the inverse damping law track ``traj``.

    Raises:
        GainConfigurationError: If a compliance gain is zero
    """
    ka_inv = gains.ka_inverse()
    p_d, pdot_d = traj.at(t)
    e_p = np.asarray(p, dtype=np.float64) - p_d
    return traj.f_d - ka_inv * (pdot_d - gains.kp * e_p)


def control_law(f_s: FloatArray, f_r: FloatArray, gains: Gains) -> FloatArray:
    """Velocity command ``K_a (F_s - F_r)``."""
    return gains.ka * (np.asarray(f_s, dtype=np.float64) - np.asarray(f_r, dtype=np.float64))
