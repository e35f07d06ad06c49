"""Tests for the contact plant and the material presets."""

from __future__ import annotations

import numpy as np
import pytest

from cutmpc.config import PlantConfig
from cutmpc.errors import ConfigurationError, SimulationIntegrityError, UnknownMaterialError
from cutmpc.plant import (
    DepthProfile,
    MaterialSpec,
    PlantState,
    Simulator,
    default_registry,
    embedded_length,
    initial_state,
    make_material,
    plant_step,
)


def _spring(stiffness: float = 2000.0, cuttability: float = 0.0) -> MaterialSpec:
    return MaterialSpec(
        name="spring",
        height=0.04,
        stiffness=DepthProfile.uniform(stiffness),
        cuttability=DepthProfile.uniform(cuttability),
        friction_coeff=0.2,
        adhesion=0.0,
        press_cut_floor=0.5,
        force_noise_std=0.0,
    )


def test_carrot_has_uncuttable_core():
    """The carrot preset cannot be cut between 40% and 60% of its depth."""
    carrot = make_material("carrot")
    assert carrot.uncuttable_bands() == [(0.4, 0.6)]
    assert carrot.cuttability(0.5) == 0
    assert carrot.cuttability(0.3) > 0


def test_hollow_pepper_has_hollow_interior():
    """The hollow pepper has zero stiffness on its interior band."""
    pepper = make_material("hollow-pepper")
    assert pepper.stiffness.zero_bands() == [(0.2, 0.8)]
    assert pepper.stiffness(0.1) > 0


def test_cake_is_soft_and_slippery():
    """Cake has uniform low stiffness and almost no friction."""
    cake = make_material("cake")
    assert len(set(cake.stiffness.values)) == 1
    assert cake.friction_coeff < 0.1
    assert cake.stiffness(0.5) < make_material("carrot").stiffness(0.5)


def test_unknown_material_lists_presets():
    """Unknown labels raise a configuration error naming every preset."""
    with pytest.raises(UnknownMaterialError) as exc_info:
        make_material("durian")
    assert isinstance(exc_info.value, ConfigurationError)
    for label in default_registry().labels():
        assert label in str(exc_info.value)


@pytest.mark.parametrize(
    "fields",
    [
        {"height": 0.0},
        {"friction_coeff": -0.1},
        {"press_cut_floor": 1.5},
        {"stiffness": {"values": [-1.0]}},
    ],
)
def test_invalid_material_override_is_rejected(fields):
    """Overrides violating the material constraints raise a configuration error."""
    with pytest.raises(ConfigurationError):
        default_registry().with_overrides({"cake": fields})


def test_material_override_adds_and_updates():
    """Override tables update a preset field or register a new material."""
    registry = default_registry().with_overrides({
        "cake": {"friction_coeff": 0.2},
        "tofu": {
            "height": 0.03,
            "stiffness": {"values": [300.0]},
            "cuttability": {"values": [50.0]},
            "friction_coeff": 0.05,
            "adhesion": 1.0,
            "press_cut_floor": 0.5,
        },
    })
    assert registry.get("cake").friction_coeff == 0.2
    assert registry.get("tofu").height == 0.03
    assert default_registry().get("cake").friction_coeff != 0.2


def test_contact_force_follows_spring_law(plant_config):
    """1 mm penetration into a 2000 N/m material gives 2 N upward force."""
    mat = _spring(2000.0)
    top = mat.top(0.0)
    state = PlantState(p=np.array([0.0, top - 0.001]), v=np.zeros(2), cut_front=top)
    _, f_s = plant_step(state, np.zeros(2), mat, plant_config)
    assert f_s[1] == pytest.approx(2.0)
    assert f_s[0] == pytest.approx(0.0)


def test_no_contact_above_object(plant_config):
    """Above the object the sensor only reads noise and the cut front is unchanged."""
    mat = make_material("cake")
    sim = Simulator(mat, plant_config)
    front = sim.cut_front
    forces = np.array([sim.step(np.array([0.0, -0.001])) for _ in range(20)])
    assert sim.cut_front == front
    assert abs(forces.mean(axis=0)).max() < 4 * mat.force_noise_std
    assert not sim.state.in_contact


def test_uncuttable_band_holds_under_max_pressing(plant_config):
    """Pressing into a zero-cuttability band for 10 s never moves the cut front."""
    mat = _spring(9000.0, cuttability=0.0)
    sim = Simulator(mat, plant_config)
    sim.with_state(p=np.array([0.0, mat.top(0.0) - 0.001]))
    front = sim.cut_front
    for i in range(1000):
        sim.step(np.array([0.02 * (-1) ** (i // 50), -0.4]))
    assert sim.cut_front == front


def test_blade_never_tunnels_through_uncut_material(plant_config):
    """Penetration stays bounded and the cut front never moves up."""
    mat = make_material("carrot")
    sim = Simulator(mat, plant_config)
    fronts = []
    for i in range(900):
        sim.step(np.array([0.03 * (-1) ** (i // 40), -0.05]))
        assert sim.state.p[1] >= sim.cut_front - plant_config.penetration_max - 1e-12
        fronts.append(sim.cut_front)
    assert np.all(np.diff(fronts) <= 0)
    core_top = mat.top(0.0) - 0.4 * mat.height
    assert min(fronts) >= mat.top(0.0) - 0.6 * mat.height
    assert min(fronts) <= core_top + plant_config.penetration_max


def test_sawing_accelerates_cutting(plant_config):
    """The same pressing depth cuts faster with lateral motion than without."""
    mat = _spring(2000.0, cuttability=20.0)

    def cut_depth(v_y: float) -> float:
        sim = Simulator(mat, plant_config.model_copy(update={"actuator_tau": 0.0}))
        top = mat.top(0.0)
        sim.with_state(p=np.array([0.0, top]))
        for _ in range(100):
            sim.with_state(p=np.array([sim.state.p[0], sim.cut_front - 0.001]))
            sim.step(np.array([v_y, 0.0]))
        return top - sim.cut_front

    assert cut_depth(0.04) > cut_depth(0.0) > 0


def test_sawing_advance_grows_with_lateral_speed(plant_config):
    """Without a press-cut floor the front only advances while sawing, faster for faster saws."""
    mat = _spring(2000.0, cuttability=20.0).model_copy(update={"press_cut_floor": 0.0})
    cfg = plant_config.model_copy(update={"actuator_tau": 0.0})
    top = mat.top(0.0)

    def advance(v_y: float) -> float:
        state = PlantState(p=np.array([0.0, top - 0.001]), v=np.zeros(2), cut_front=top)
        nxt, _ = plant_step(state, np.array([v_y, 0.0]), mat, cfg)
        return top - nxt.cut_front

    assert advance(0.0) == 0.0
    speeds = [0.005, 0.01, 0.02, 0.05, 0.1]
    advances = [advance(v) for v in speeds]
    assert all(a > 0 for a in advances)
    assert np.all(np.diff(advances) > 0)
    assert advance(-0.05) == pytest.approx(advance(0.05))


def test_velocity_decays_without_command():
    """With u = 0 and no contact the blade velocity drops below 1% within 5 time constants."""
    cfg = PlantConfig(actuator_tau=0.02)
    state = PlantState(p=np.array([0.0, 0.5]), v=np.array([0.2, -0.1]), cut_front=0.04)
    speed = np.linalg.norm(state.v)
    for _ in range(round(5 * cfg.actuator_tau / cfg.dt)):
        state, _ = plant_step(state, np.zeros(2), make_material("cake"), cfg)
    assert np.linalg.norm(state.v) <= 0.01 * speed


def test_sensed_force_changes_are_bounded(plant_config):
    """Consecutive readings differ by at most L dt + 6 sigma under bounded commands."""
    mat = _spring(2000.0, cuttability=20.0).model_copy(update={"force_noise_std": 0.05})
    sim = Simulator(mat, plant_config)
    commands = [np.array([0.02 * np.sin(0.05 * i), -0.005]) for i in range(400)]
    forces = np.array([sim.step(u) for u in commands])
    assert sim.state.in_contact
    cfg, k = plant_config, 2000.0
    v_max = max(np.abs(u).max() for u in commands)
    delta_max, dt = cfg.penetration_max, cfg.dt
    # contact depth moves with the blade and with the cut front
    step_z = k * (v_max + 20.0 * delta_max * (mat.press_cut_floor + v_max)) * dt
    # drag follows the normal force and the smoothed sign of the lateral velocity
    lag = 1.0 - np.exp(-dt / cfg.actuator_tau)
    step_y = mat.friction_coeff * (step_z + k * delta_max * 2 * v_max * lag / cfg.v_ref)
    jumps = np.abs(np.diff(forces, axis=0))
    noise = 6 * mat.force_noise_std
    assert jumps[:, 1].max() <= step_z + noise
    assert jumps[:, 0].max() <= step_y + noise


def test_blade_cannot_reenter_uncut_material_sideways():
    """A blade lowered beside the object stops at its edge instead of jumping back in."""
    carrot = make_material("carrot")
    cfg = PlantConfig(actuator_tau=0.0)
    top = carrot.top(cfg.table_z)
    state = PlantState(p=np.array([0.059, top - 0.001]), v=np.zeros(2), cut_front=top)
    commands = [(0.05, 0.0)] * 10 + [(0.0, -0.05)] * 20 + [(-0.05, 0.0)] * 20
    for u in commands:
        state, _ = plant_step(state, np.array(u), carrot, cfg)
        if carrot.contains_y(float(state.p[0])):
            assert state.p[1] >= state.cut_front - cfg.penetration_max - 1e-12
    assert state.p[0] > carrot.y_extent[1]
    assert state.p[0] == pytest.approx(carrot.y_extent[1])
    assert state.p[1] == pytest.approx(top - 0.011)
    assert state.v[0] == 0.0


def test_lateral_friction_opposes_sawing(plant_config):
    """The lateral force has the opposite sign of the sawing velocity."""
    mat = _spring(2000.0)
    top = mat.top(0.0)
    state = PlantState(p=np.array([0.0, top - 0.001]), v=np.array([0.05, 0.0]), cut_front=top)
    _, f_plus = plant_step(state, np.array([0.05, 0.0]), mat, plant_config)
    state = PlantState(p=np.array([0.0, top - 0.001]), v=np.array([-0.05, 0.0]), cut_front=top)
    _, f_minus = plant_step(state, np.array([-0.05, 0.0]), mat, plant_config)
    assert f_plus[0] < 0 < f_minus[0]
    assert f_plus[0] == pytest.approx(-f_minus[0])


def test_actuator_lag_is_exact_exponential():
    """The velocity relaxes toward the command with the configured time constant."""
    cfg = PlantConfig(actuator_tau=0.05)
    sim = Simulator(make_material("air"), cfg)
    sim.with_state(p=np.array([0.5, 0.5]))
    for _ in range(5):
        sim.step(np.array([0.1, 0.0]))
    expected = 0.1 * (1 - np.exp(-5 * cfg.dt / cfg.actuator_tau))
    assert sim.state.v[0] == pytest.approx(expected, rel=1e-12)


def test_same_seed_gives_identical_trajectories(plant_config):
    """Two plants with the same seed produce bit-identical force traces."""
    mat = make_material("zucchini")
    commands = [np.array([0.02 * np.sin(0.1 * i), -0.01]) for i in range(300)]
    a, b = Simulator(mat, plant_config), Simulator(mat, plant_config)
    forces_a = np.array([a.step(u) for u in commands])
    forces_b = np.array([b.step(u) for u in commands])
    np.testing.assert_array_equal(forces_a, forces_b)
    other = Simulator(mat, plant_config.model_copy(update={"rng_seed": 1}))
    forces_c = np.array([other.step(u) for u in commands])
    assert not np.array_equal(forces_a, forces_c)


def test_nan_command_is_rejected(plant_config):
    """A NaN command raises a simulation integrity error."""
    sim = Simulator(make_material("cake"), plant_config)
    with pytest.raises(SimulationIntegrityError):
        sim.step(np.array([np.nan, 0.0]))


def test_sensor_bias_is_added(plant_config):
    """A configured sensor bias shifts every reading."""
    cfg = plant_config.model_copy(update={"sensor_bias": (0.3, -0.2)})
    sim = Simulator(make_material("air").model_copy(update={"force_noise_std": 0.0}), cfg)
    np.testing.assert_allclose(sim.last_force, [0.3, -0.2])
    np.testing.assert_allclose(sim.step(np.zeros(2)), [0.3, -0.2])


def test_embedded_length_above_object():
    """A blade above the object has no embedded length."""
    mat = make_material("cake")
    state = PlantState(p=np.array([0.0, mat.top(0.0) + 0.01]), v=np.zeros(2), cut_front=0.0)
    assert embedded_length(state, mat) == 0


def test_embedded_length_fully_cut():
    """At the table of a fully cut object the whole height is embedded."""
    mat = make_material("cake")
    state = PlantState(p=np.array([0.0, 0.0]), v=np.zeros(2), cut_front=0.0)
    assert embedded_length(state, mat) == pytest.approx(mat.height)


def test_embedded_length_mid_cut():
    """Mid-cut the embedded length is the distance from the top to the blade."""
    mat = make_material("cake")
    top = mat.top(0.0)
    state = PlantState(p=np.array([0.01, top - 0.015]), v=np.zeros(2), cut_front=top - 0.016)
    assert embedded_length(state, mat) == pytest.approx(0.015)
    outside = PlantState(p=np.array([0.2, top - 0.015]), v=np.zeros(2), cut_front=top - 0.016)
    assert embedded_length(outside, mat) == 0


def test_initial_state_starts_above_object(plant_config):
    """The blade starts at rest above the sawing center with an uncut object."""
    mat = make_material("lemon")
    state = initial_state(mat, plant_config)
    assert state.p[0] == mat.saw_center
    assert state.p[1] == pytest.approx(mat.top(0.0) + plant_config.start_clearance)
    assert state.cut_front == mat.top(0.0)
