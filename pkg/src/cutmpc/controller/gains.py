"""Diagonal stiffness and compliance gains of the admittance law."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from cutmpc.errors import GainConfigurationError
from cutmpc.helpers import is_finite, vec2


if TYPE_CHECKING:
    from collections.abc import Sequence

    from cutmpc.cut_types import FloatArray


@dataclass(frozen=True, slots=True)
class Gains:
    """Diagonals of K_p (1/s) and K_a ((m/s)/N), axes ordered (y, z)."""

    kp: FloatArray
    ka: FloatArray

    def __post_init__(self) -> None:
        try:
            kp, ka = vec2(self.kp), vec2(self.ka)
        except ValueError as e:
            raise GainConfigurationError(str(e)) from e
        if not is_finite(kp, ka) or np.any(kp < 0) or np.any(ka < 0):
            msg = f"Gains must be finite and non-negative, got kp={kp}, ka={ka}"
            raise GainConfigurationError(msg)
        object.__setattr__(self, "kp", kp)
        object.__setattr__(self, "ka", ka)

    @classmethod
    def uniform(cls, kp: float, ka: float) -> Gains:
        return cls(kp=np.full(2, kp), ka=np.full(2, ka))

    @classmethod
    def from_pairs(cls, kp: Sequence[float], ka: Sequence[float]) -> Gains:
        return cls(kp=np.asarray(kp, dtype=np.float64), ka=np.asarray(ka, dtype=np.float64))

    def ka_inverse(self) -> FloatArray:
        """Diagonal of K_a^-1.

        Raises:
            GainConfigurationError: If a compliance gain is zero
        """
        if np.any(self.ka == 0):
            msg = f"Compliance gain K_a must be strictly positive, got {self.ka}"
            raise GainConfigurationError(msg)
        return 1.0 / self.ka

    @property
    def kp_matrix(self) -> FloatArray:
        return np.diag(self.kp)

    @property
    def ka_matrix(self) -> FloatArray:
        return np.diag(self.ka)
