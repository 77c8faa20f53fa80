"""Per-step observations, the 6-frame history stack, and policy network shapes.

A single observation frame is a flat float64 vector with the fixed layout

    [command(3), body_rates(3), gravity(3), q(n_joints), qd(n_joints),
     last_action(n_lower)]

in exactly that order (command = [vx, wyaw, h]). The history stack always
holds the 6 most recent frames; at episode start it is pre-filled by
repeating the first frame, which avoids a cold-start discontinuity.
``flatten`` concatenates oldest first, so after pushing f7 onto f1..f6 the
result is f2..f7.

Frames and stacks are value types: every operation returns a new object and
nothing here mutates shared state. Observation noise is applied elsewhere
(see :mod:`teleopsim.randomize`) so clean frames stay available for metrics.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateRobot, ShapeError
from .robot import RobotDescription

HISTORY_LEN = 6

# Fixed feature sizes independent of the robot: command(3) + rates(3) + gravity(3).
BASE_FEATURES = 9
GROUND_TRUTH_DIM = 2  # [vx, wyaw] fed to encoder/critic alongside the frames
ENCODER_OUT = 35
TARGET_OUT = 32
PROTO_SHAPE = (64, 32)


@dataclass(frozen=True)
class Command:
    """Operator command: forward speed, yaw rate, target base height."""

    vx: float = 0.0
    wyaw: float = 0.0
    height: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.vx, self.wyaw, self.height])


def clamp_command(desc: RobotDescription, cmd: Command) -> Command:
    """Clamp a command into the robot's published ranges and height window."""
    h_lo, h_hi = desc.height_command_range
    return Command(
        vx=float(np.clip(cmd.vx, *desc.vx_range)),
        wyaw=float(np.clip(cmd.wyaw, *desc.wyaw_range)),
        height=float(np.clip(cmd.height, h_lo, h_hi)),
    )


@dataclass
class RobotState:
    """Full surrogate-plant state at one control tick.

    Array fields may carry an optional leading batch dimension; the joint
    axis is always last. ``base_vel`` is expressed in the body frame
    (forward, left, up); ``foot_pos`` is body-frame xy plus height above
    ground, ordered [left, right]; ``tilt`` is (roll, pitch).
    """

    t: float
    q: np.ndarray
    qd: np.ndarray
    omega_body: np.ndarray
    gravity_proj: np.ndarray
    base_height: np.ndarray
    base_vel: np.ndarray
    base_yaw_rate: np.ndarray
    tilt: np.ndarray
    foot_contact: np.ndarray
    foot_force_z: np.ndarray
    foot_force_xy: np.ndarray
    foot_pos: np.ndarray
    last_action: np.ndarray

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.q.shape[:-1]

    def copy(self) -> "RobotState":
        return RobotState(
            t=self.t,
            q=self.q.copy(),
            qd=self.qd.copy(),
            omega_body=self.omega_body.copy(),
            gravity_proj=self.gravity_proj.copy(),
            base_height=np.copy(self.base_height),
            base_vel=self.base_vel.copy(),
            base_yaw_rate=np.copy(self.base_yaw_rate),
            tilt=self.tilt.copy(),
            foot_contact=self.foot_contact.copy(),
            foot_force_z=self.foot_force_z.copy(),
            foot_force_xy=self.foot_force_xy.copy(),
            foot_pos=self.foot_pos.copy(),
            last_action=self.last_action.copy(),
        )


def ground_truth_pair(cmd: Command) -> np.ndarray:
    """The [vx, wyaw] pair consumed directly by encoder and critic inputs."""
    return np.array([cmd.vx, cmd.wyaw])


@dataclass(frozen=True)
class FrameLayout:
    """Slice map of one observation frame for a given joint inventory."""

    n_joints: int
    n_lower: int

    @classmethod
    def for_robot(cls, desc: RobotDescription) -> "FrameLayout":
        return cls(n_joints=desc.n_joints, n_lower=desc.n_lower)

    @property
    def length(self) -> int:
        return BASE_FEATURES + 2 * self.n_joints + self.n_lower

    @cached_property
    def command(self) -> slice:
        return slice(0, 3)

    @cached_property
    def omega(self) -> slice:
        return slice(3, 6)

    @cached_property
    def gravity(self) -> slice:
        return slice(6, 9)

    @cached_property
    def q(self) -> slice:
        return slice(9, 9 + self.n_joints)

    @cached_property
    def qd(self) -> slice:
        return slice(9 + self.n_joints, 9 + 2 * self.n_joints)

    @cached_property
    def last_action(self) -> slice:
        return slice(9 + 2 * self.n_joints, self.length)


def assemble_frame(layout: FrameLayout, cmd: Command, state: RobotState) -> np.ndarray:
    """Concatenate one observation frame in the fixed layout order.

    Pure function: identical inputs produce identical frames.
    """
    if state.q.shape[-1] != layout.n_joints or state.qd.shape[-1] != layout.n_joints:
        raise ShapeError(
            f"state has {state.q.shape[-1]} joints, layout expects {layout.n_joints}"
        )
    if state.last_action.shape[-1] != layout.n_lower:
        raise ShapeError(
            f"last_action has {state.last_action.shape[-1]} entries, layout expects {layout.n_lower}"
        )
    return np.concatenate(
        [
            cmd.as_array(),
            np.asarray(state.omega_body, dtype=float),
            np.asarray(state.gravity_proj, dtype=float),
            np.asarray(state.q, dtype=float),
            np.asarray(state.qd, dtype=float),
            np.asarray(state.last_action, dtype=float),
        ]
    )


class ObservationStack:
    """Ring of the 6 most recent frames (oldest first). Immutable value type."""

    __slots__ = ("frames",)

    def __init__(self, frames: tuple[np.ndarray, ...]):
        if len(frames) != HISTORY_LEN:
            raise ShapeError(f"stack needs exactly {HISTORY_LEN} frames, got {len(frames)}")
        self.frames = frames

    @classmethod
    def initial(cls, frame: np.ndarray) -> "ObservationStack":
        return cls(tuple(frame.copy() for _ in range(HISTORY_LEN)))

    def push(self, frame: np.ndarray) -> "ObservationStack":
        if frame.shape != self.frames[0].shape:
            raise ShapeError(f"frame shape {frame.shape} != stack frame shape {self.frames[0].shape}")
        return ObservationStack(self.frames[1:] + (frame,))

    def flatten(self) -> np.ndarray:
        return np.concatenate(self.frames)

    def __len__(self) -> int:
        return HISTORY_LEN


def push_frame(stack: ObservationStack, frame: np.ndarray) -> ObservationStack:
    return stack.push(frame)


@dataclass(frozen=True)
class NetShape:
    """Input/output dimensions of the estimator / actor / critic MLP stack."""

    encoder_in: int
    encoder_out: int
    target_in: int
    target_out: int
    actor_in: int
    actor_out: int
    critic_in: int
    critic_out: int
    proto: tuple[int, int]


def net_shape_for(n_joints: int, n_lower: int) -> NetShape:
    """Closed-form layer widths for a robot with the given joint counts."""
    if n_lower < 1:
        raise DegenerateRobot("robot has no lower-body joints; action space is empty")
    if n_joints < n_lower:
        raise ShapeError(f"n_joints={n_joints} < n_lower={n_lower}")
    one_step = BASE_FEATURES + 2 * n_joints + n_lower
    return NetShape(
        encoder_in=HISTORY_LEN * one_step,
        encoder_out=ENCODER_OUT,
        target_in=one_step,
        target_out=TARGET_OUT,
        actor_in=ENCODER_OUT + one_step,
        actor_out=n_lower,
        critic_in=GROUND_TRUTH_DIM + one_step,
        critic_out=1,
        proto=PROTO_SHAPE,
    )


def net_shape(desc: RobotDescription) -> NetShape:
    return net_shape_for(desc.n_joints, desc.n_lower)
