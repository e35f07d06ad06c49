"""Synthetic contact plant and material presets."""

from __future__ import annotations

from cutmpc.plant.materials import (
    DepthProfile,
    MaterialRegistry,
    MaterialSpec,
    default_registry,
    make_material,
)
from cutmpc.plant.simulator import (
    PlantState,
    Simulator,
    embedded_length,
    initial_state,
    plant_step,
)


__all__ = [
    "DepthProfile",
    "MaterialRegistry",
    "MaterialSpec",
    "PlantState",
    "Simulator",
    "default_registry",
    "embedded_length",
    "initial_state",
    "make_material",
    "plant_step",
]
