"""Scripted lower-body controller: a height servo over the two-link leg.

This stands in for a trained locomotion policy so the full loop can run: it
solves hip-pitch/knee/ankle-pitch angles from the leg geometry to place the
base at the commanded height with the foot under the hip and the sole level,
and leaves roll/yaw joints at their defaults. Planar velocity tracking is
handled by the plant's first-order lag, so the servo does not synthesize a
gait. It exists to exercise the pipeline, not to claim locomotion
competence.
"""

from __future__ import annotations

import numpy as np

from .robot import RobotDescription


def _positions_in_lower(desc: RobotDescription, global_idx: np.ndarray) -> np.ndarray:
    pos = {int(g): i for i, g in enumerate(desc.lower_indices)}
    return np.array([pos[int(g)] for g in global_idx], dtype=int)


def solve_leg_angles(desc: RobotDescription, height) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(hip_pitch, knee, ankle_pitch) placing the base at ``height``.

    Accepts a scalar or a batch of heights; angles clamp to the reachable
    window and to the ankle's position limits.
    """
    t, s = desc.thigh_len, desc.shank_len
    height = np.asarray(height, dtype=float)
    knee_hi = min(desc.joints[k].pos_max for k in desc.knee_indices)
    # Leg length window reachable without leaving the knee's range.
    leg_min = np.sqrt(max(t * t + s * s + 2 * t * s * np.cos(knee_hi), 1e-6))
    leg = np.clip(height - desc.pelvis_offset, leg_min, t + s)
    cos_knee = np.clip((leg**2 - t * t - s * s) / (2 * t * s), -1.0, 1.0)
    knee = np.arccos(cos_knee)
    hip = -np.arctan2(s * np.sin(knee), t + s * np.cos(knee))
    ankle_idx = desc.leg_indices.ankle_pitch[0]
    ankle = np.clip(-(hip + knee), desc.joints[ankle_idx].pos_min, desc.joints[ankle_idx].pos_max)
    return hip, knee, ankle


def height_servo_targets(desc: RobotDescription, height) -> np.ndarray:
    """Lower-body joint targets tracking a commanded base height.

    Shape: ``(n_lower,)`` for a scalar height, ``(B, n_lower)`` for a batch.
    Symmetric by construction (both legs get identical targets, lateral
    joints stay at defaults), so it mirrors onto itself.
    """
    hip, knee, ankle = solve_leg_angles(desc, height)
    height = np.asarray(height, dtype=float)
    targets = np.broadcast_to(
        desc.default_pos[desc.lower_indices], height.shape + (desc.n_lower,)
    ).copy()
    li = desc.leg_indices
    targets[..., _positions_in_lower(desc, li.hip_pitch)] = hip[..., None]
    targets[..., _positions_in_lower(desc, li.knee)] = knee[..., None]
    targets[..., _positions_in_lower(desc, li.ankle_pitch)] = ankle[..., None]
    return targets
