"""Surrogate humanoid plant.

This is explicitly a stand-in for a full physics simulator: each joint is a
decoupled inertia driven by PD torque, base height comes from two-link leg
kinematics, planar base velocity and yaw rate relax toward the command with a
first-order lag, and body tilt is a damped pendulum kicked by scheduled
pushes. The point is to exercise the reward/curriculum/protocol pipeline and
the live teleoperation loop, not to reproduce locomotion dynamics.

Torque law. The default mode computes

    tau_i = kp_i * (a_i - default_pos_i) - kd_i * qd_i        (pd_reference="default")

which never feeds back the current joint position: it acts as an open-loop
velocity command and cannot hold a posture. The conventional closed-loop
form

    tau_i = kp_i * (a_i - q_i) - kd_i * qd_i                  (pd_reference="current")

is available behind ``PlantConfig.pd_reference`` and is what sessions and
the batch harness use. Both are clamped to +-torque_max.

Integration is semi-implicit Euler at ``1 / dt_physics`` Hz with
``substeps`` sub-steps per control tick, so one call to :func:`step_state`
advances exactly ``1 / control_hz`` seconds. Joints clamp to their position
limits with velocity zeroed at the stop.

Synthesized contact model: per-leg vertical extent
``E = thigh*cos(hip_pitch) + shank*cos(hip_pitch + knee)``; base height is
``pelvis_offset + mean(E)``; each foot's height above ground is
``mean(E) - E`` (so the longer leg penetrates and carries load). Vertical
foot force is weight share plus a spring-damper on penetration; tangential
force is viscous drag on foot slip while in contact.

One plant instance has exactly one stepper; instances may run in parallel,
each owning its RNG. All state arrays accept an optional leading batch
dimension (used by the batch harness).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError
from .observation import Command, RobotState
from .robot import JointSpec, RobotDescription

PD_REFERENCES = ("default", "current")


@dataclass(frozen=True)
class PlantConfig:
    """Numerical and disturbance parameters of the surrogate plant."""

    dt_physics: float = 0.005
    control_hz: float = 50.0
    substeps: int = 4
    joint_inertia_lower: float = 1.0
    joint_inertia_upper: float = 0.2
    base_vel_tau: float = 0.3
    tilt_stiffness: float = 40.0
    tilt_damping: float = 6.0
    tilt_push_gain: float = 0.4
    fall_tilt_rad: float = 0.7
    min_base_height: float = 0.15
    push_interval: float = 4.0
    push_vel_range: tuple[float, float] = (-0.5, 0.5)
    pd_reference: str = "default"
    stance_half_width: float = 0.12
    contact_threshold: float = 1e-3
    contact_stiffness: float = 5.0e4
    contact_damping: float = 500.0
    slip_damping: float = 250.0
    gravity: float = 9.81

    def __post_init__(self):
        if self.pd_reference not in PD_REFERENCES:
            raise ConfigError(f"pd_reference must be one of {PD_REFERENCES}")
        for name in ("dt_physics", "control_hz", "substeps", "base_vel_tau", "push_interval"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"PlantConfig.{name} must be > 0")
        if not math.isclose(self.dt_physics * self.substeps, 1.0 / self.control_hz, rel_tol=1e-9):
            raise ConfigError(
                f"dt_physics*substeps = {self.dt_physics * self.substeps} "
                f"must equal 1/control_hz = {1.0 / self.control_hz}"
            )

    @property
    def control_dt(self) -> float:
        return 1.0 / self.control_hz


@dataclass
class ActionCommand:
    """Per-tick actuation: lower-body policy targets plus upper-body pose targets."""

    lower_targets: np.ndarray
    upper_targets: np.ndarray


@dataclass(frozen=True)
class JointGains:
    """Effective per-joint actuation parameters (after randomization, if any)."""

    kp: np.ndarray
    kd: np.ndarray
    inertia: np.ndarray
    torque_offset: np.ndarray


def nominal_gains(desc: RobotDescription, cfg: PlantConfig) -> JointGains:
    inertia = np.full(desc.n_joints, cfg.joint_inertia_upper)
    inertia[desc.lower_indices] = cfg.joint_inertia_lower
    return JointGains(
        kp=desc.kp.copy(),
        kd=desc.kd.copy(),
        inertia=inertia,
        torque_offset=np.zeros(desc.n_joints),
    )


def pd_torque(spec: JointSpec, a: float, q: float, qd: float, reference: str = "default") -> float:
    """Torque for a single joint under the PD law, clamped to +-torque_max.

    ``reference="default"`` uses the joint's default position as the
    proportional reference (the published form); ``"current"`` uses the
    measured position (closed loop).
    """
    anchor = spec.default_pos if reference == "default" else q
    tau = spec.kp * (a - anchor) - spec.kd * qd
    return min(max(tau, -spec.torque_max), spec.torque_max)


def _pd_torque_vec(
    a: np.ndarray,
    q: np.ndarray,
    qd: np.ndarray,
    default_pos: np.ndarray,
    gains: JointGains,
    torque_max: np.ndarray,
    reference: str,
) -> np.ndarray:
    anchor = default_pos if reference == "default" else q
    tau = gains.kp * (a - anchor) - gains.kd * qd + gains.torque_offset
    return np.clip(tau, -torque_max, torque_max)


def interpolate_upper(prev: np.ndarray, nxt: np.ndarray, k: int, n: int) -> np.ndarray:
    """Elementwise linear interpolation prev -> nxt at step k of n.

    Blended form so the endpoints reproduce prev (k=0) and nxt (k=n) exactly.
    """
    if n < 1 or not 0 <= k <= n:
        raise ConfigError(f"need 0 <= k <= n and n >= 1, got k={k} n={n}")
    prev = np.asarray(prev, dtype=float)
    nxt = np.asarray(nxt, dtype=float)
    w = k / n
    return (1.0 - w) * prev + w * nxt


def leg_extent(desc: RobotDescription, q: np.ndarray) -> np.ndarray:
    """Vertical extent of each two-link leg, shape (..., 2) ordered [left, right]."""
    li = desc.leg_indices
    hp = q[..., li.hip_pitch]
    kn = q[..., li.knee]
    ext = desc.thigh_len * np.cos(hp) + desc.shank_len * np.cos(hp + kn)
    return np.maximum(ext, 0.0)


def _leg_extent_rate(desc: RobotDescription, q: np.ndarray, qd: np.ndarray) -> np.ndarray:
    li = desc.leg_indices
    hp, kn = q[..., li.hip_pitch], q[..., li.knee]
    hpd, knd = qd[..., li.hip_pitch], qd[..., li.knee]
    return -desc.thigh_len * np.sin(hp) * hpd - desc.shank_len * np.sin(hp + kn) * (hpd + knd)


def _foot_xy(desc: RobotDescription, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    li = desc.leg_indices
    hp, kn = q[..., li.hip_pitch], q[..., li.knee]
    x = desc.thigh_len * np.sin(hp) + desc.shank_len * np.sin(hp + kn)
    return x, np.sin(q[..., li.hip_roll]) * (desc.thigh_len + desc.shank_len)


def gravity_projection(tilt: np.ndarray) -> np.ndarray:
    """Unit gravity direction in the body frame for (roll, pitch) tilt."""
    roll, pitch = tilt[..., 0], tilt[..., 1]
    return np.stack(
        [
            np.sin(pitch),
            -np.sin(roll) * np.cos(pitch),
            -np.cos(roll) * np.cos(pitch),
        ],
        axis=-1,
    )


def initial_state(
    desc: RobotDescription,
    cfg: PlantConfig,
    batch_shape: tuple[int, ...] = (),
    q: np.ndarray | None = None,
) -> RobotState:
    """Standing state at t=0 (joints at defaults unless ``q`` is given)."""
    nj, nl = desc.n_joints, desc.n_lower
    if q is None:
        q = np.broadcast_to(desc.default_pos, batch_shape + (nj,)).copy()
    else:
        q = np.array(q, dtype=float)
    qd = np.zeros(batch_shape + (nj,))
    ext = leg_extent(desc, q)
    mean_ext = ext.mean(axis=-1)
    base_height = desc.pelvis_offset + mean_ext
    foot_h = np.maximum(mean_ext[..., None] - ext, 0.0)
    contact = foot_h <= cfg.contact_threshold
    n_contact = np.maximum(contact.sum(axis=-1, keepdims=True), 1)
    force_z = np.where(contact, desc.mass * cfg.gravity / n_contact, 0.0)
    fx, fy = _foot_xy(desc, q)
    fy = fy + np.array([cfg.stance_half_width, -cfg.stance_half_width])
    return RobotState(
        t=0.0,
        q=q,
        qd=qd,
        omega_body=np.zeros(batch_shape + (3,)),
        gravity_proj=np.broadcast_to(np.array([0.0, 0.0, -1.0]), batch_shape + (3,)).copy(),
        base_height=np.asarray(base_height, dtype=float),
        base_vel=np.zeros(batch_shape + (3,)),
        base_yaw_rate=np.zeros(batch_shape) if batch_shape else np.float64(0.0),
        tilt=np.zeros(batch_shape + (2,)),
        foot_contact=contact,
        foot_force_z=force_z,
        foot_force_xy=np.zeros(batch_shape + (2,)),
        foot_pos=np.stack([fx, fy, foot_h], axis=-1),
        last_action=np.zeros(batch_shape + (nl,)),
    )


def step_state(
    desc: RobotDescription,
    cfg: PlantConfig,
    state: RobotState,
    action: ActionCommand,
    cmd: Command,
    push_dv: np.ndarray | None = None,
    gains: JointGains | None = None,
) -> RobotState:
    """Advance one control tick. Pure: the push draw, if any, is supplied by the caller."""
    lower = np.asarray(action.lower_targets, dtype=float)
    upper = np.asarray(action.upper_targets, dtype=float)
    if np.isnan(lower).any() or np.isnan(upper).any() or np.isnan(state.q).any() or np.isnan(state.qd).any():
        raise NumericalError("NaN in plant inputs")
    if gains is None:
        gains = nominal_gains(desc, cfg)

    targets = np.zeros(state.q.shape)
    targets[..., desc.lower_indices] = lower
    targets[..., desc.upper_indices] = upper
    targets = np.clip(targets, desc.pos_min, desc.pos_max)

    q = state.q.copy()
    qd = state.qd.copy()
    tilt = state.tilt.copy()
    tilt_rate = state.omega_body[..., 0:2].copy()  # (roll_rate, pitch_rate)

    dt = cfg.dt_physics
    for _ in range(cfg.substeps):
        tau = _pd_torque_vec(targets, q, qd, desc.default_pos, gains, desc.torque_max, cfg.pd_reference)
        qd = qd + (tau / gains.inertia) * dt
        qd = np.clip(qd, -desc.vel_max, desc.vel_max)
        q = q + qd * dt
        clamped = np.clip(q, desc.pos_min, desc.pos_max)
        qd = np.where(clamped != q, 0.0, qd)
        q = clamped
        # Damped pendulum for (roll, pitch); ankle correction folded into stiffness.
        tilt_acc = -cfg.tilt_stiffness * tilt - cfg.tilt_damping * tilt_rate
        tilt_rate = tilt_rate + tilt_acc * dt
        tilt = tilt + tilt_rate * dt

    tick_dt = cfg.control_dt
    decay = math.exp(-tick_dt / cfg.base_vel_tau)
    vel_cmd = np.zeros(state.base_vel.shape[:-1] + (2,))
    vel_cmd[..., 0] = cmd.vx
    planar = vel_cmd + (state.base_vel[..., :2] - vel_cmd) * decay
    yaw_rate = cmd.wyaw + (state.base_yaw_rate - cmd.wyaw) * decay
    if push_dv is not None:
        push_dv = np.asarray(push_dv, dtype=float)
        planar = planar + push_dv
        tilt_rate = tilt_rate + cfg.tilt_push_gain * push_dv[..., ::-1]  # y push rolls, x push pitches

    ext = leg_extent(desc, q)
    ext_rate = _leg_extent_rate(desc, q, qd)
    mean_ext = ext.mean(axis=-1)
    base_height = np.asarray(desc.pelvis_offset + mean_ext, dtype=float)
    v_z = (base_height - state.base_height) / tick_dt

    foot_h = mean_ext[..., None] - ext
    penetration = np.maximum(-foot_h, 0.0)
    pen_rate = ext_rate - ext_rate.mean(axis=-1, keepdims=True)
    foot_h = np.maximum(foot_h, 0.0)
    contact = foot_h <= cfg.contact_threshold
    n_contact = np.maximum(contact.sum(axis=-1, keepdims=True), 1)
    weight_share = desc.mass * cfg.gravity / n_contact
    force_z = np.where(
        contact,
        np.maximum(weight_share + cfg.contact_stiffness * penetration + cfg.contact_damping * pen_rate, 0.0),
        0.0,
    )

    fx, fy = _foot_xy(desc, q)
    fy = fy + np.array([cfg.stance_half_width, -cfg.stance_half_width])
    foot_pos = np.stack([fx, fy, foot_h], axis=-1)
    foot_vel_xy = (foot_pos[..., :2] - state.foot_pos[..., :2]) / tick_dt
    force_xy = np.where(contact, cfg.slip_damping * np.linalg.norm(foot_vel_xy, axis=-1), 0.0)

    omega = np.concatenate(
        [tilt_rate, np.expand_dims(np.asarray(yaw_rate, dtype=float), axis=-1)], axis=-1
    )
    return RobotState(
        t=state.t + tick_dt,
        q=q,
        qd=qd,
        omega_body=omega,
        gravity_proj=gravity_projection(tilt),
        base_height=base_height,
        base_vel=np.concatenate([planar, np.expand_dims(np.asarray(v_z, dtype=float), axis=-1)], axis=-1),
        base_yaw_rate=np.asarray(yaw_rate, dtype=float),
        tilt=tilt,
        foot_contact=contact,
        foot_force_z=force_z,
        foot_force_xy=force_xy,
        foot_pos=foot_pos,
        last_action=lower.copy(),
    )


def termination_mask(state: RobotState, cfg: PlantConfig) -> np.ndarray:
    """Boolean termination per environment (batched counterpart of is_terminated)."""
    tilt_mag = np.linalg.norm(state.tilt, axis=-1)
    nan = (
        np.isnan(state.q).any(axis=-1)
        | np.isnan(state.qd).any(axis=-1)
        | np.isnan(np.asarray(state.base_height))
        | np.isnan(state.tilt).any(axis=-1)
    )
    return (tilt_mag > cfg.fall_tilt_rad) | (np.asarray(state.base_height) < cfg.min_base_height) | nan


def is_terminated(state: RobotState, cfg: PlantConfig) -> tuple[bool, str | None]:
    """Scalar termination check with a reason: 'fall', 'collapse' or 'numeric'."""
    if (
        np.isnan(state.q).any()
        or np.isnan(state.qd).any()
        or np.isnan(np.asarray(state.base_height)).any()
        or np.isnan(state.tilt).any()
    ):
        return True, "numeric"
    if float(np.linalg.norm(state.tilt, axis=-1)) > cfg.fall_tilt_rad:
        return True, "fall"
    if float(state.base_height) < cfg.min_base_height:
        return True, "collapse"
    return False, None


def push_due(t_next: float, cfg: PlantConfig) -> bool:
    """True when the tick ending at t_next lands on the push schedule (t > 0)."""
    k = round(t_next * cfg.control_hz)
    every = round(cfg.push_interval * cfg.control_hz)
    return k > 0 and every > 0 and k % every == 0


class Plant:
    """Single-stepper wrapper owning state, RNG and the push schedule."""

    def __init__(
        self,
        desc: RobotDescription,
        cfg: PlantConfig | None = None,
        seed: int | np.random.SeedSequence = 0,
        gains: JointGains | None = None,
        init_q: np.ndarray | None = None,
    ):
        self.desc = desc
        self.cfg = cfg or PlantConfig()
        self.rng = np.random.default_rng(seed)
        self.gains = gains if gains is not None else nominal_gains(desc, self.cfg)
        self.state = initial_state(desc, self.cfg, q=init_q)

    def step(self, action: ActionCommand, cmd: Command) -> RobotState:
        push = None
        if push_due(self.state.t + self.cfg.control_dt, self.cfg):
            lo, hi = self.cfg.push_vel_range
            push = self.rng.uniform(lo, hi, size=2)
        self.state = step_state(self.desc, self.cfg, self.state, action, cmd, push_dv=push, gains=self.gains)
        return self.state

    def terminated(self) -> tuple[bool, str | None]:
        return is_terminated(self.state, self.cfg)
