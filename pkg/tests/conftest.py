import numpy as np
import pytest

from teleopsim.observation import RobotState
from teleopsim.plant import PlantConfig, initial_state
from teleopsim.robot import JointSpec, RobotDescription, load_preset


@pytest.fixture(scope="session")
def g1():
    return load_preset("g1")


@pytest.fixture(scope="session")
def gr1():
    return load_preset("gr1")


def _j(name, group, side, mirror_sign, pos=(-2.0, 2.0), default=0.0, kp=40.0, kd=1.0):
    return JointSpec(
        name=name,
        group=group,
        side=side,
        pos_min=pos[0],
        pos_max=pos[1],
        vel_max=20.0,
        torque_max=50.0,
        kp=kp,
        kd=kd,
        default_pos=default,
        mirror_sign=mirror_sign,
    )


@pytest.fixture(scope="session")
def tiny():
    """Four-joint robot (2 lower, 2 upper) for layout arithmetic tests."""
    return RobotDescription(
        name="tiny",
        joints=(
            _j("left_hip_pitch", "lower", "left", +1),
            _j("right_hip_pitch", "lower", "right", +1),
            _j("left_shoulder_pitch", "upper-arm", "left", +1),
            _j("right_shoulder_pitch", "upper-arm", "right", +1),
        ),
        thigh_len=0.3,
        shank_len=0.3,
        pelvis_offset=0.1,
        mass=10.0,
        height_target_walk=0.7,
        squat_height_range=(0.3, 0.7),
        vx_range=(-0.5, 1.0),
        vy_range=(-0.5, 0.5),
        wyaw_range=(-1.0, 1.0),
    )


def make_state(desc, cfg=None, **overrides) -> RobotState:
    """Standing state with selected fields overridden (test helper).

    Falls back to a bare zero state for descriptions without a full leg
    chain (observation/mirror tests use minimal robots).
    """
    try:
        state = initial_state(desc, cfg or PlantConfig(), ())
    except Exception:
        nj, nl = desc.n_joints, desc.n_lower
        state = RobotState(
            t=0.0,
            q=desc.default_pos.copy(),
            qd=np.zeros(nj),
            omega_body=np.zeros(3),
            gravity_proj=np.array([0.0, 0.0, -1.0]),
            base_height=np.float64(desc.height_target_walk),
            base_vel=np.zeros(3),
            base_yaw_rate=np.float64(0.0),
            tilt=np.zeros(2),
            foot_contact=np.array([True, True]),
            foot_force_z=np.zeros(2),
            foot_force_xy=np.zeros(2),
            foot_pos=np.zeros((2, 3)),
            last_action=np.zeros(nl),
        )
    for key, value in overrides.items():
        if not hasattr(state, key):
            raise AttributeError(key)
        setattr(state, key, np.asarray(value, dtype=float) if key != "t" else value)
    return state
