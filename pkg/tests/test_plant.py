import dataclasses
import math

import numpy as np
import pytest

from teleopsim.errors import ConfigError, NumericalError
from teleopsim.observation import Command
from teleopsim.plant import (
    ActionCommand,
    Plant,
    PlantConfig,
    initial_state,
    interpolate_upper,
    is_terminated,
    leg_extent,
    pd_torque,
    step_state,
)
from teleopsim.robot import JointSpec, load_preset

from conftest import make_state


def spec(kp=40.0, kd=1.0, default=0.0, tq=88.0):
    return JointSpec("j", "lower", "center", -3.0, 3.0, 30.0, tq, kp, kd, default_pos=default)


def hold_action(desc):
    return ActionCommand(
        lower_targets=desc.default_pos[desc.lower_indices].copy(),
        upper_targets=desc.default_pos[desc.upper_indices].copy(),
    )


class TestPdTorque:
    def test_zero_at_default_and_rest(self):
        assert pd_torque(spec(), a=0.0, q=0.5, qd=0.0) == 0.0

    def test_published_arithmetic(self):
        # kp=40, kd=1, a - default = 0.5, qd = 1 -> 40*0.5 - 1 = 19
        assert pd_torque(spec(), a=0.5, q=0.0, qd=1.0) == 19.0

    def test_saturation(self):
        assert pd_torque(spec(), a=10.0, q=0.0, qd=0.0) == 88.0
        assert pd_torque(spec(), a=-10.0, q=0.0, qd=0.0) == -88.0

    def test_default_reference_ignores_current_position(self):
        # The published form anchors on the default position, not on q.
        assert pd_torque(spec(), a=0.5, q=-2.0, qd=0.0) == pd_torque(spec(), a=0.5, q=2.0, qd=0.0)

    def test_current_reference_closes_the_loop(self):
        assert pd_torque(spec(), a=0.5, q=0.2, qd=0.0, reference="current") == pytest.approx(40 * 0.3)

    def test_matches_closed_form_randomized(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            kp, kd = rng.uniform(1, 200), rng.uniform(0, 10)
            tq = rng.uniform(1, 100)
            a, q0, qd = rng.uniform(-4, 4), rng.uniform(-1, 1), rng.uniform(-20, 20)
            s = spec(kp=kp, kd=kd, default=q0, tq=tq)
            expected = min(max(kp * (a - q0) - kd * qd, -tq), tq)
            assert pd_torque(s, a, 0.0, qd) == expected


class TestStep:
    def test_rest_state_only_time_advances(self, g1):
        cfg = PlantConfig()  # default-reference PD: zero offset -> zero torque
        state = initial_state(g1, cfg)
        nxt = step_state(g1, cfg, state, hold_action(g1), Command(0, 0, 0.74))
        assert nxt.t == pytest.approx(state.t + 0.02)
        assert np.array_equal(nxt.q, state.q)
        assert np.array_equal(nxt.qd, state.qd)
        assert float(nxt.base_height) == pytest.approx(float(state.base_height))
        assert np.allclose(nxt.base_vel[:2], 0.0)

    def test_two_link_height_with_straight_legs(self, g1):
        q = g1.default_pos.copy()
        li = g1.leg_indices
        for idx in (li.hip_pitch, li.knee, li.ankle_pitch):
            q[idx] = 0.0
        ext = leg_extent(g1, q)
        assert np.allclose(ext, g1.thigh_len + g1.shank_len)
        state = initial_state(g1, PlantConfig(), q=q)
        assert float(state.base_height) == pytest.approx(g1.pelvis_offset + 0.74)

    def test_two_link_height_custom_lengths(self, g1):
        desc = dataclasses.replace(g1, thigh_len=0.3, shank_len=0.3)
        q = desc.default_pos.copy()
        li = desc.leg_indices
        for idx in (li.hip_pitch, li.knee, li.ankle_pitch):
            q[idx] = 0.0
        state = initial_state(desc, PlantConfig(), q=q)
        assert float(state.base_height) == pytest.approx(0.6 + desc.pelvis_offset)

    def test_push_applied_on_schedule(self, g1):
        cfg = PlantConfig(push_vel_range=(0.5, 0.5))
        plant = Plant(g1, cfg, seed=0)
        cmd = Command(0, 0, 0.74)
        act = hold_action(g1)
        jumps = []
        for k in range(round(4.0 * cfg.control_hz)):
            before = plant.state.base_vel[:2].copy()
            state = plant.step(act, cmd)
            delta = state.base_vel[:2] - before * math.exp(-cfg.control_dt / cfg.base_vel_tau)
            if np.abs(delta).max() > 1e-12:
                jumps.append((state.t, delta.copy()))
        assert len(jumps) == 1
        t, delta = jumps[0]
        assert t == pytest.approx(4.0)
        assert delta[0] == pytest.approx(0.5)
        assert delta[1] == pytest.approx(0.5)

    def test_nan_action_raises(self, g1):
        plant = Plant(g1, PlantConfig(), seed=0)
        act = hold_action(g1)
        act.lower_targets[0] = np.nan
        with pytest.raises(NumericalError):
            plant.step(act, Command(0, 0, 0.74))

    def test_determinism_bitwise(self, g1):
        cfg = PlantConfig(pd_reference="current")
        rng = np.random.default_rng(5)
        actions = [
            ActionCommand(
                lower_targets=rng.uniform(-0.3, 0.3, g1.n_lower),
                upper_targets=rng.uniform(-0.3, 0.3, g1.n_upper),
            )
            for _ in range(100)
        ]
        streams = []
        for _ in range(2):
            plant = Plant(g1, cfg, seed=42)
            qs = [plant.step(a, Command(0.3, 0.1, 0.7)).q.copy() for a in actions]
            streams.append(np.stack(qs))
        assert np.array_equal(streams[0], streams[1])

    def test_joint_kinetic_energy_non_increasing_without_drive(self, g1):
        # Targets at defaults under the default-reference law leave pure damping.
        cfg = PlantConfig()
        state = initial_state(g1, cfg)
        state.qd = np.random.default_rng(3).uniform(-2, 2, g1.n_joints)
        inertia = np.where(np.isin(np.arange(g1.n_joints), g1.lower_indices), 1.0, 0.2)
        act = hold_action(g1)
        energies = []
        for _ in range(50):
            state = step_state(g1, cfg, state, act, Command(0, 0, 0.74))
            energies.append(0.5 * float(np.sum(inertia * state.qd**2)))
        assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))

    def test_base_height_continuity_bound(self, g1):
        cfg = PlantConfig(pd_reference="current")
        plant = Plant(g1, cfg, seed=9)
        rng = np.random.default_rng(11)
        bound = (g1.thigh_len + g1.shank_len) * 2 * g1.vel_max.max() * cfg.control_dt
        prev_h = float(plant.state.base_height)
        for _ in range(200):
            act = ActionCommand(
                lower_targets=rng.uniform(g1.pos_min[g1.lower_indices], g1.pos_max[g1.lower_indices]),
                upper_targets=g1.default_pos[g1.upper_indices],
            )
            state = plant.step(act, Command(0, 0, 0.5))
            h = float(state.base_height)
            assert abs(h - prev_h) <= bound
            prev_h = h

    def test_contact_force_consistency(self, g1):
        cfg = PlantConfig(pd_reference="current")
        plant = Plant(g1, cfg, seed=2)
        rng = np.random.default_rng(7)
        act = hold_action(g1)
        li = g1.leg_indices
        for k in range(300):
            if k % 25 == 0:  # asymmetric knee targets lift one foot
                act.lower_targets = g1.default_pos[g1.lower_indices].copy()
                knee_pos = np.searchsorted(g1.lower_indices, li.knee)
                act.lower_targets[knee_pos] = rng.uniform(0.0, 2.0, 2)
            state = plant.step(act, Command(0, 0, 0.6))
            on = state.foot_contact
            assert np.all(state.foot_force_z[on] >= 0.0)
            assert np.all(state.foot_force_z[~on] == 0.0)
            assert np.all(state.foot_force_xy[~on] == 0.0)

    def test_gravity_projection_stays_unit(self, g1):
        cfg = PlantConfig(push_vel_range=(-0.5, 0.5))
        plant = Plant(g1, cfg, seed=13)
        act = hold_action(g1)
        for _ in range(450):  # spans two pushes, so tilt actually moves
            state = plant.step(act, Command(0.3, 0.2, 0.6))
            assert abs(float(np.linalg.norm(state.gravity_proj)) - 1.0) <= 1e-9

    def test_batched_step_matches_scalar(self, g1):
        cfg = PlantConfig(pd_reference="current")
        scalar = initial_state(g1, cfg)
        batch = initial_state(g1, cfg, (3,))
        act_s = hold_action(g1)
        act_b = ActionCommand(
            lower_targets=np.tile(act_s.lower_targets, (3, 1)),
            upper_targets=np.tile(act_s.upper_targets, (3, 1)),
        )
        cmd = Command(0.4, -0.2, 0.6)
        for _ in range(10):
            scalar = step_state(g1, cfg, scalar, act_s, cmd)
            batch = step_state(g1, cfg, batch, act_b, cmd)
        for i in range(3):
            assert np.array_equal(batch.q[i], scalar.q)
            assert batch.base_height[i] == scalar.base_height


class TestTermination:
    def test_upright_not_terminated(self, g1):
        assert is_terminated(initial_state(g1, PlantConfig()), PlantConfig()) == (False, None)

    def test_tilt_fall(self, g1):
        state = make_state(g1, tilt=[0.8, 0.0])
        done, reason = is_terminated(state, PlantConfig(fall_tilt_rad=0.7))
        assert done and reason == "fall"

    def test_collapse(self, g1):
        state = make_state(g1, base_height=0.1)
        done, reason = is_terminated(state, PlantConfig())
        assert done and reason == "collapse"

    def test_nan_velocity(self, g1):
        state = make_state(g1)
        state.qd[3] = np.nan
        done, reason = is_terminated(state, PlantConfig())
        assert done and reason == "numeric"


class TestInterpolateUpper:
    def test_endpoints(self):
        prev, nxt = np.array([0.0, 1.0]), np.array([2.0, -1.0])
        assert np.array_equal(interpolate_upper(prev, nxt, 0, 50), prev)
        assert np.array_equal(interpolate_upper(prev, nxt, 50, 50), nxt)

    def test_midpoint(self):
        assert interpolate_upper(np.array([0.0]), np.array([1.0]), 25, 50)[0] == 0.5

    def test_fifty_step_schedule_is_linear(self):
        # Arm targets arriving at 10 Hz are interpolated 50 times on-robot.
        prev, nxt = np.array([0.2]), np.array([-0.4])
        vals = [interpolate_upper(prev, nxt, k, 50)[0] for k in range(51)]
        diffs = np.diff(vals)
        assert np.allclose(diffs, diffs[0])
        assert vals[0] == 0.2 and vals[-1] == -0.4

    def test_invalid_args(self):
        with pytest.raises(ConfigError):
            interpolate_upper(np.zeros(1), np.zeros(1), 2, 1)
        with pytest.raises(ConfigError):
            interpolate_upper(np.zeros(1), np.zeros(1), 0, 0)


def test_config_invariant():
    with pytest.raises(ConfigError):
        PlantConfig(dt_physics=0.01, control_hz=50.0, substeps=4)
    with pytest.raises(ConfigError):
        PlantConfig(pd_reference="banana")
