"""Reflection of states, observations, actions and commands across the x-z plane.

Sign conventions (configurable per robot via the joint table's sign rules;
the vector conventions below are fixed here):

* joints: left/right pairs swap, center joints map to themselves; pitch-like
  axes keep their sign, roll/yaw-like axes flip;
* body rates: (wx, wy, wz) -> (-wx, wy, -wz);
* projected gravity: (gx, gy, gz) -> (gx, -gy, gz);
* command: (vx, wyaw, h) -> (vx, -wyaw, h);
* base velocity: (vx, vy, vz) -> (vx, -vy, vz).

Every map is an involution. All functions are pure and safe for parallel use.

The actor symmetry loss composes the mirror on the policy output before the
comparison, so a perfectly left/right symmetric policy scores exactly zero
(mirrored inputs should give mirrored, not equal, outputs). The published
form that compares the raw outputs directly is available behind
``mirror_outputs=False``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ShapeError
from .observation import Command, FrameLayout, ObservationStack, RobotState
from .robot import RobotDescription, mirror_index_permutation

OMEGA_SIGNS = np.array([-1.0, 1.0, -1.0])
GRAVITY_SIGNS = np.array([1.0, -1.0, 1.0])
COMMAND_SIGNS = np.array([1.0, -1.0, 1.0])
BASE_VEL_SIGNS = np.array([1.0, -1.0, 1.0])


@dataclass(frozen=True)
class MirrorSpec:
    """Precomputed permutations and signs for one robot's frame layout."""

    layout: FrameLayout
    joint_perm: np.ndarray
    joint_signs: np.ndarray
    lower_perm: np.ndarray
    lower_signs: np.ndarray

    @classmethod
    def for_robot(cls, desc: RobotDescription) -> "MirrorSpec":
        perm, signs = mirror_index_permutation(desc)
        lower = desc.lower_indices
        pos_in_lower = {int(j): i for i, j in enumerate(lower)}
        lower_perm = np.array([pos_in_lower[int(perm[j])] for j in lower], dtype=int)
        return cls(
            layout=FrameLayout.for_robot(desc),
            joint_perm=perm,
            joint_signs=signs,
            lower_perm=lower_perm,
            lower_signs=signs[lower].copy(),
        )


def mirror_joint_vector(v: np.ndarray, spec: MirrorSpec) -> np.ndarray:
    if v.shape[-1] != len(spec.joint_perm):
        raise ShapeError(f"joint vector length {v.shape[-1]} != {len(spec.joint_perm)}")
    return spec.joint_signs * v[..., spec.joint_perm]


def mirror_action(a: np.ndarray, spec: MirrorSpec) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape[-1] != len(spec.lower_perm):
        raise ShapeError(f"action length {a.shape[-1]} != {len(spec.lower_perm)}")
    return spec.lower_signs * a[..., spec.lower_perm]


def mirror_command(cmd: Command) -> Command:
    return Command(vx=cmd.vx, wyaw=-cmd.wyaw, height=cmd.height)


def mirror_frame(frame: np.ndarray, spec: MirrorSpec) -> np.ndarray:
    """Mirror one observation frame (layout: cmd, rates, gravity, q, qd, a_prev)."""
    lay = spec.layout
    frame = np.asarray(frame, dtype=float)
    if frame.shape[-1] != lay.length:
        raise ShapeError(f"frame length {frame.shape[-1]} != layout length {lay.length}")
    out = np.empty_like(frame)
    out[..., lay.command] = COMMAND_SIGNS * frame[..., lay.command]
    out[..., lay.omega] = OMEGA_SIGNS * frame[..., lay.omega]
    out[..., lay.gravity] = GRAVITY_SIGNS * frame[..., lay.gravity]
    out[..., lay.q] = mirror_joint_vector(frame[..., lay.q], spec)
    out[..., lay.qd] = mirror_joint_vector(frame[..., lay.qd], spec)
    out[..., lay.last_action] = mirror_action(frame[..., lay.last_action], spec)
    return out


def mirror_stack(stack: ObservationStack, spec: MirrorSpec) -> ObservationStack:
    return ObservationStack(tuple(mirror_frame(f, spec) for f in stack.frames))


def mirror_flat_stack(flat: np.ndarray, spec: MirrorSpec) -> np.ndarray:
    """Mirror a flattened 6-frame stack without reconstructing the object."""
    n = spec.layout.length
    flat = np.asarray(flat, dtype=float)
    if flat.shape[-1] % n != 0:
        raise ShapeError(f"flat stack length {flat.shape[-1]} is not a multiple of {n}")
    frames = flat.reshape(flat.shape[:-1] + (-1, n))
    return mirror_frame(frames, spec).reshape(flat.shape)


def mirror_state(state: RobotState, spec: MirrorSpec) -> RobotState:
    """Mirror a full plant state (feet swap left/right, lateral components flip)."""
    foot_pos = state.foot_pos[..., ::-1, :].copy()
    foot_pos[..., 1] = -foot_pos[..., 1]
    return RobotState(
        t=state.t,
        q=mirror_joint_vector(state.q, spec),
        qd=mirror_joint_vector(state.qd, spec),
        omega_body=OMEGA_SIGNS * state.omega_body,
        gravity_proj=GRAVITY_SIGNS * state.gravity_proj,
        base_height=np.copy(state.base_height),
        base_vel=BASE_VEL_SIGNS * state.base_vel,
        base_yaw_rate=-state.base_yaw_rate,
        tilt=np.stack([-state.tilt[..., 0], state.tilt[..., 1]], axis=-1),
        foot_contact=state.foot_contact[..., ::-1].copy(),
        foot_force_z=state.foot_force_z[..., ::-1].copy(),
        foot_force_xy=state.foot_force_xy[..., ::-1].copy(),
        foot_pos=foot_pos,
        last_action=mirror_action(state.last_action, spec),
    )


class Transition(NamedTuple):
    """One rollout transition; ``obs`` may be a frame array or a stack."""

    obs: np.ndarray | ObservationStack
    action: np.ndarray
    reward: float
    next_obs: np.ndarray | ObservationStack


def _mirror_obs(obs, spec: MirrorSpec):
    if isinstance(obs, ObservationStack):
        return mirror_stack(obs, spec)
    arr = np.asarray(obs, dtype=float)
    if arr.shape[-1] == spec.layout.length:
        return mirror_frame(arr, spec)
    return mirror_flat_stack(arr, spec)


def augment_transition(t: Transition, spec: MirrorSpec) -> tuple[Transition, Transition]:
    """Return the transition plus its mirrored twin; the reward is untouched."""
    mirrored = Transition(
        obs=_mirror_obs(t.obs, spec),
        action=mirror_action(t.action, spec),
        reward=t.reward,
        next_obs=_mirror_obs(t.next_obs, spec),
    )
    return t, mirrored


def symmetry_losses(
    policy_eval: Callable[[np.ndarray], np.ndarray],
    value_eval: Callable[[np.ndarray], float],
    obs: ObservationStack,
    spec: MirrorSpec,
    mirror_outputs: bool = True,
) -> tuple[float, float]:
    """Actor/critic symmetry losses probed at one observation stack.

    Actor: MSE between the mirrored policy output on ``obs`` and the policy
    output on the mirrored ``obs`` (set ``mirror_outputs=False`` for the raw
    published comparison). Critic: squared difference of the two values.
    """
    flat = obs.flatten()
    m_flat = mirror_stack(obs, spec).flatten()
    a = np.asarray(policy_eval(flat), dtype=float)
    a_m = np.asarray(policy_eval(m_flat), dtype=float)
    if a.shape != a_m.shape:
        raise ShapeError(f"policy output shapes differ: {a.shape} vs {a_m.shape}")
    ref = mirror_action(a, spec) if mirror_outputs else a
    l_actor = float(np.mean((ref - a_m) ** 2))
    v = float(value_eval(flat))
    v_m = float(value_eval(m_flat))
    l_critic = (v - v_m) ** 2
    return l_actor, l_critic
