"""Parameterized synthetic materials standing in for fruits, vegetables and cake.

Magnitudes are artifact choices sized to the 8 N force range of the controller,
they are not measured properties of real food.
"""

from __future__ import annotations

from bisect import bisect_right
from functools import lru_cache
import pathlib
import tomllib
from typing import TYPE_CHECKING, Any, Self

from pydantic import ConfigDict, Field, ValidationError, model_validator
from schemez import Schema

from cutmpc import log
from cutmpc.errors import ConfigurationError, UnknownMaterialError


if TYPE_CHECKING:
    from collections.abc import Mapping


logger = log.get_logger(__name__)


class DepthProfile(Schema):
    """Piecewise-constant function of the depth fraction (0 = top surface, 1 = table)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    breakpoints: tuple[float, ...] = ()
    """Interior band boundaries, strictly increasing inside (0, 1)."""

    values: tuple[float, ...] = Field(min_length=1)
    """One value per band; ``len(values) == len(breakpoints) + 1``."""

    @model_validator(mode="after")
    def _check_bands(self) -> Self:
        if len(self.values) != len(self.breakpoints) + 1:
            msg = "A profile needs exactly one more value than breakpoints"
            raise ValueError(msg)
        if any(v < 0 for v in self.values):
            msg = "Profile values must be non-negative"
            raise ValueError(msg)
        edges = (0.0, *self.breakpoints, 1.0)
        if any(b <= a for a, b in zip(edges, edges[1:])):
            msg = "Breakpoints must be strictly increasing inside (0, 1)"
            raise ValueError(msg)
        return self

    @classmethod
    def uniform(cls, value: float) -> DepthProfile:
        return cls(values=(value,))

    @classmethod
    def banded(cls, outside: float, start: float, end: float, inside: float) -> DepthProfile:
        """Profile equal to ``inside`` on ``[start, end)`` and ``outside`` elsewhere."""
        return cls(breakpoints=(start, end), values=(outside, inside, outside))

    def __call__(self, depth_fraction: float) -> float:
        return self.values[bisect_right(self.breakpoints, depth_fraction)]

    def bands(self) -> list[tuple[float, float, float]]:
        """List of ``(start, end, value)`` triples covering [0, 1]."""
        edges = (0.0, *self.breakpoints, 1.0)
        return [(a, b, v) for a, b, v in zip(edges, edges[1:], self.values)]

    def zero_bands(self) -> list[tuple[float, float]]:
        """Depth bands on which the profile vanishes."""
        return [(a, b) for a, b, v in self.bands() if v == 0]


class MaterialSpec(Schema):
    """Synthetic object clamped on the table."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    """Class label."""

    y_extent: tuple[float, float] = (-0.06, 0.06)
    """Lateral interval occupied by the object (m)."""

    height: float = Field(gt=0)
    """Height above the table (m)."""

    stiffness: DepthProfile
    """Contact stiffness at the cut front (N/m)."""

    cuttability: DepthProfile
    """Cut-front advance coefficient beta; zero makes a band uncuttable."""

    friction_coeff: float = Field(ge=0)
    """Coulomb coefficient between blade and flesh."""

    adhesion: float = Field(ge=0)
    """Lateral drag per meter of embedded blade (N/m)."""

    press_cut_floor: float = Field(ge=0, le=1)
    """Cutting progress obtained without any sawing motion (epsilon)."""

    force_noise_std: float = Field(0.05, ge=0)
    """Standard deviation of the sensor noise (N)."""

    @model_validator(mode="after")
    def _check_extent(self) -> Self:
        if self.y_extent[1] <= self.y_extent[0]:
            msg = "y_extent must be an increasing interval"
            raise ValueError(msg)
        return self

    @property
    def saw_center(self) -> float:
        return 0.5 * (self.y_extent[0] + self.y_extent[1])

    def top(self, table_z: float) -> float:
        return table_z + self.height

    def contains_y(self, y: float) -> bool:
        return self.y_extent[0] <= y <= self.y_extent[1]

    def depth_fraction(self, z: float, table_z: float) -> float:
        """Depth of ``z`` below the top surface as a fraction of the height, clamped to [0, 1]."""
        return min(1.0, max(0.0, (self.top(table_z) - z) / self.height))

    def uncuttable_bands(self) -> list[tuple[float, float]]:
        return self.cuttability.zero_bands()


class MaterialRegistry(Schema):
    """Named material presets with optional per-field overrides."""

    materials: dict[str, MaterialSpec]
    """Label -> material mapping."""

    def labels(self) -> list[str]:
        return sorted(self.materials)

    def get(self, label: str) -> MaterialSpec:
        try:
            return self.materials[label]
        except KeyError:
            raise UnknownMaterialError(label, self.labels()) from None

    def with_overrides(self, overrides: Mapping[str, Mapping[str, Any]]) -> MaterialRegistry:
        """Return a registry where each override table updates (or adds) one material.

        Args:
            overrides: label -> field values; unknown labels create new materials
                       and then need every required field.

        Raises:
            ConfigurationError: If an override does not validate.
        """
        materials = dict(self.materials)
        for label, fields in overrides.items():
            base = materials[label].model_dump() if label in materials else {"name": label}
            try:
                materials[label] = MaterialSpec.model_validate({**base, **fields})
            except ValidationError as e:
                msg = f"Invalid material override for {label!r}: {e}"
                raise ConfigurationError(msg) from e
            logger.debug("Applied material override for %r: %s", label, sorted(fields))
        return MaterialRegistry(materials=materials)

    @classmethod
    def from_toml_file(cls, file_path: str | pathlib.Path) -> MaterialRegistry:
        """Load presets, overridden by the ``[materials.<label>]`` tables of a TOML file."""
        with pathlib.Path(file_path).open("rb") as f:
            data = tomllib.load(f)
        return default_registry().with_overrides(data.get("materials", data))


def _preset(name: str, **fields: Any) -> MaterialSpec:
    return MaterialSpec(name=name, **fields)


@lru_cache
def default_registry() -> MaterialRegistry:
    """Built-in presets."""
    presets = [
        _preset(
            "air",
            height=0.04,
            stiffness=DepthProfile.uniform(0.0),
            cuttability=DepthProfile.uniform(1000.0),
            friction_coeff=0.0,
            adhesion=0.0,
            press_cut_floor=1.0,
        ),
        # homogeneous, little lateral friction
        _preset(
            "cake",
            height=0.04,
            stiffness=DepthProfile.uniform(800.0),
            cuttability=DepthProfile.uniform(40.0),
            friction_coeff=0.05,
            adhesion=2.0,
            press_cut_floor=0.6,
        ),
        _preset(
            "cucumber",
            height=0.035,
            stiffness=DepthProfile.uniform(2500.0),
            cuttability=DepthProfile.uniform(25.0),
            friction_coeff=0.1,
            adhesion=5.0,
            press_cut_floor=0.4,
        ),
        # stiff and viscous
        _preset(
            "zucchini",
            height=0.04,
            stiffness=DepthProfile.uniform(5000.0),
            cuttability=DepthProfile.uniform(10.0),
            friction_coeff=0.3,
            adhesion=25.0,
            press_cut_floor=0.15,
        ),
        _preset(
            "cheese",
            height=0.03,
            stiffness=DepthProfile.uniform(6000.0),
            cuttability=DepthProfile.uniform(6.0),
            friction_coeff=0.5,
            adhesion=40.0,
            press_cut_floor=0.3,
        ),
        # heterogeneous
        _preset(
            "bell-pepper",
            height=0.05,
            stiffness=DepthProfile(breakpoints=(0.1, 0.9), values=(4000.0, 300.0, 4000.0)),
            cuttability=DepthProfile(breakpoints=(0.1, 0.9), values=(8.0, 60.0, 8.0)),
            friction_coeff=0.15,
            adhesion=5.0,
            press_cut_floor=0.3,
        ),
        _preset(
            "hollow-pepper",
            height=0.05,
            stiffness=DepthProfile.banded(5000.0, 0.2, 0.8, 0.0),
            cuttability=DepthProfile.banded(6.0, 0.2, 0.8, 1000.0),
            friction_coeff=0.1,
            adhesion=3.0,
            press_cut_floor=0.25,
        ),
        _preset(
            "lemon",
            height=0.045,
            stiffness=DepthProfile(breakpoints=(0.15, 0.85), values=(6000.0, 1500.0, 6000.0)),
            cuttability=DepthProfile(breakpoints=(0.15, 0.85), values=(6.0, 30.0, 6.0)),
            friction_coeff=0.2,
            adhesion=8.0,
            press_cut_floor=0.3,
        ),
        # held out by default
        _preset(
            "potato",
            height=0.045,
            stiffness=DepthProfile.uniform(7000.0),
            cuttability=DepthProfile.uniform(8.0),
            friction_coeff=0.4,
            adhesion=60.0,
            press_cut_floor=0.05,
        ),
        _preset(
            "carrot",
            height=0.03,
            stiffness=DepthProfile.uniform(9000.0),
            cuttability=DepthProfile.banded(8.0, 0.4, 0.6, 0.0),
            friction_coeff=0.3,
            adhesion=30.0,
            press_cut_floor=0.1,
        ),
    ]
    return MaterialRegistry(materials={m.name: m for m in presets})


def make_material(
    class_label: str,
    registry: MaterialRegistry | None = None,
) -> MaterialSpec:
    """Get a fully populated material by label.

    Args:
        class_label: Preset name (e.g. "cake", "carrot")
        registry: Registry to look up, defaults to the built-in presets

    Raises:
        UnknownMaterialError: If the label is not registered
    """
    return (registry or default_registry()).get(class_label)
