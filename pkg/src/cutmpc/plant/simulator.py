"""Deterministic 2-axis contact plant (Y saw, Z cut)."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import math
from typing import TYPE_CHECKING

import numpy as np

from cutmpc import log
from cutmpc.errors import SimulationIntegrityError
from cutmpc.helpers import is_finite, vec2


if TYPE_CHECKING:
    from cutmpc.config import PlantConfig
    from cutmpc.cut_types import FloatArray
    from cutmpc.plant.materials import MaterialSpec


logger = log.get_logger(__name__)

Y, Z = 0, 1


@dataclass(frozen=True, slots=True)
class PlantState:
    """Ground-truth simulator state."""

    p: FloatArray
    """Blade position (y, z) in meters."""

    v: FloatArray
    """Actual blade velocity after the actuator lag (m/s)."""

    cut_front: float
    """Lowest z the cut has reached inside the object (m)."""

    in_contact: bool = False
    """Whether the blade pressed on material or table during the last step."""

    step: int = 0
    """Number of plant steps taken, used to key the sensor noise."""

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", vec2(self.p))
        object.__setattr__(self, "v", vec2(self.v))


def initial_state(mat: MaterialSpec, cfg: PlantConfig) -> PlantState:
    """Blade at rest above the sawing center, object uncut."""
    top = mat.top(cfg.table_z)
    return PlantState(
        p=np.array([mat.saw_center, top + cfg.start_clearance]),
        v=np.zeros(2),
        cut_front=top,
    )


def embedded_length(state: PlantState, mat: MaterialSpec, table_z: float = 0.0) -> float:
    """Length of blade below the object's top surface and above the cut front."""
    if not mat.contains_y(float(state.p[Y])):
        return 0.0
    top = mat.top(table_z)
    lowest = max(float(state.p[Z]), state.cut_front)
    return min(mat.height, max(0.0, top - lowest))


def _advance_actuator(
    v: FloatArray, u: FloatArray, dt: float, tau: float
) -> tuple[FloatArray, FloatArray]:
    """Exact solution of the first-order lag over one step: (new velocity, displacement)."""
    if tau == 0:
        return u.copy(), u * dt
    decay = math.exp(-dt / tau)
    v_new = u + (v - u) * decay
    dp = u * dt + (v - u) * tau * (1.0 - decay)
    return v_new, dp


def _block_lateral_entry(
    state: PlantState, p: FloatArray, v: FloatArray, mat: MaterialSpec, floor: float
) -> None:
    """Stop a blade beside the object at the edge when it moves sideways into uncut material.

    Only a blade that was already below ``floor`` outside the object's extent is
    affected; ``p`` and ``v`` are updated in place.
    """
    y_prev, y = float(state.p[Y]), float(p[Y])
    lo, hi = mat.y_extent
    if mat.contains_y(y_prev) or float(state.p[Z]) >= floor or p[Z] >= floor:
        return
    if min(y_prev, y) > hi or max(y_prev, y) < lo:
        return
    p[Y] = math.nextafter(lo, -math.inf) if y_prev < lo else math.nextafter(hi, math.inf)
    v[Y] = 0.0


def plant_step(
    state: PlantState,
    u: FloatArray,
    mat: MaterialSpec,
    cfg: PlantConfig,
) -> tuple[PlantState, FloatArray]:
    """Advance the plant by one step of ``cfg.dt`` under commanded velocity ``u``.

    Pure: the sensor noise is drawn from a generator keyed on ``(cfg.rng_seed, state.step)``.

    Returns:
        The next state and the sensed force (y, z) in Newton, upward positive.

    Raises:
        SimulationIntegrityError: If the command or the state contains NaN or Inf
    """
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (2,) or not is_finite(u, state.p, state.v, state.cut_front):
        msg = f"Non-finite plant input at step {state.step}: u={u}, p={state.p}, v={state.v}"
        raise SimulationIntegrityError(msg)
    dt = cfg.dt
    v, dp = _advance_actuator(state.v, u, dt, cfg.actuator_tau)
    p = state.p + dp
    front = state.cut_front
    _block_lateral_entry(state, p, v, mat, front - cfg.penetration_max)
    inside = mat.contains_y(float(p[Y]))

    # the blade may press at most penetration_max into uncut material or the table
    floor = cfg.table_z - cfg.penetration_max
    if inside:
        floor = max(floor, front - cfg.penetration_max)
    if p[Z] < floor:
        p[Z] = floor
        v[Z] = max(float(v[Z]), 0.0)

    z = float(p[Z])
    depth = mat.depth_fraction(front, cfg.table_z)
    delta = max(0.0, front - z) if inside else 0.0
    f_object = mat.stiffness(depth) * delta
    f_table = cfg.table_stiffness * max(0.0, cfg.table_z - z)

    if delta > 0:
        advance = mat.cuttability(depth) * delta * (mat.press_cut_floor + abs(float(v[Y]))) * dt
        front = max(front - min(advance, delta), cfg.table_z)

    drag = mat.friction_coeff * f_object
    if inside:
        drag += mat.adhesion * embedded_length(
            PlantState(p=p, v=v, cut_front=front), mat, cfg.table_z
        )
    f_y = -drag * math.tanh(float(v[Y]) / cfg.v_ref)
    contact = np.array([f_y, f_object + f_table])

    rng = np.random.default_rng((cfg.rng_seed, state.step))
    noise = rng.normal(0.0, mat.force_noise_std, size=2) if mat.force_noise_std > 0 else 0.0
    f_s = contact + noise + np.asarray(cfg.sensor_bias, dtype=np.float64)

    nxt = PlantState(
        p=p,
        v=v,
        cut_front=front,
        in_contact=bool(delta > 0 or f_table > 0),
        step=state.step + 1,
    )
    return nxt, f_s


@dataclass
class Simulator:
    """Stateful plant instance: one material, one seed, one current state.

    Example:
        >>> sim = Simulator(make_material("cake"), PlantConfig())
        >>> f_s = sim.step(np.array([0.0, -0.01]))
    """

    material: MaterialSpec
    config: PlantConfig
    state: PlantState = field(init=False)
    last_force: FloatArray = field(init=False)

    def __post_init__(self) -> None:
        self.reset()

    def reset(self) -> None:
        self.state = initial_state(self.material, self.config)
        self.last_force = np.asarray(self.config.sensor_bias, dtype=np.float64).copy()

    @property
    def time(self) -> float:
        return self.state.step * self.config.dt

    @property
    def cut_front(self) -> float:
        return self.state.cut_front

    def step(self, u: FloatArray) -> FloatArray:
        """Apply one velocity command and return the sensed force."""
        self.state, self.last_force = plant_step(self.state, u, self.material, self.config)
        return self.last_force

    def cut_complete(self, tolerance: float = 1e-3) -> bool:
        return self.state.cut_front <= self.config.table_z + tolerance

    def with_state(self, **changes: object) -> PlantState:
        """Replace fields of the current state (test and scenario setup)."""
        self.state = replace(self.state, **changes)  # type: ignore[arg-type]
        return self.state
