"""Reward suite: every shaping term with per-robot weights and breakdowns.

Terms follow the published low-manipulation reward table. Tracking terms use
``exp(-4 * err^2)`` and therefore lie in (0, 1], equal to 1 exactly at zero
error. Penalty terms are raw non-negative quantities whose sign is carried by
the weight. Two conventions the table leaves open are fixed here:

* feet/knee lateral distance is banded: the raw value is
  ``clip(d - d_min, max=0) + clip(d_max - d, max=0)`` (zero inside
  [d_min, d_max], negative outside), which is what the d_max limit
  parameters exist for;
* the out-of-bound action term sums ``max(0, a - a_max) + max(0, a_min - a)``
  per joint (pure overage).

Foot corner points for the parallelism terms are synthesized from
``foot_pos`` with a fixed footprint (0.10 m x 0.05 m by default), tilted by
the ankle/hip chain angles and yawed by hip yaw.

The engine recomputes joint torques from the same PD law the plant applies
(nominal gains; per-episode randomization offsets are not observable here).

Most functions are pure; a small per-environment tracker holds feet air time
and previous contacts, so keep one engine instance per plant and call
``evaluate`` once per control tick in order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError, NotFoundError
from .observation import Command, RobotState
from .plant import ActionCommand
from .robot import RobotDescription

TRACKING_SHARPNESS = 4.0
REWARD_SCHEMA = "reward-config/1"
PRESET_NAMES = ("g1", "gr1")

TERM_NAMES = (
    "x_vel_tracking",
    "y_vel_tracking",
    "ang_vel_tracking",
    "base_height_tracking",
    "lin_vel_z",
    "ang_vel_xy",
    "orientation",
    "action_rate",
    "hip_deviation",
    "ankle_deviation",
    "squat_knee",
    "dof_acc",
    "dof_pos_limits",
    "feet_air_time",
    "feet_clearance",
    "feet_lateral_distance",
    "knee_lateral_distance",
    "feet_ground_parallel",
    "feet_parallel",
    "smoothness",
    "joint_power",
    "feet_stumble",
    "torques",
    "dof_vel",
    "dof_vel_limits",
    "torque_limits",
    "no_fly",
    "joint_tracking_error",
    "feet_slip",
    "feet_contact_force",
    "contact_momentum",
    "action_vanish",
    "stand_still",
)


@dataclass(frozen=True)
class RewardConfig:
    """Weights plus the limit parameters the penalty terms compare against."""

    name: str
    weights: dict[str, float]
    least_feet_distance: float
    most_feet_distance: float
    least_knee_distance: float
    most_knee_distance: float
    clearance_height_target: float
    max_contact_force: float
    soft_dof_pos_limit: float = 0.975
    soft_dof_vel_limit: float = 0.80
    soft_torque_limit: float = 0.95
    feet_air_bonus_offset: float = 0.5
    stand_still_eps: float = 0.05
    footprint_length: float = 0.10
    footprint_width: float = 0.05
    stance_half_width: float = 0.12
    power_floor: float = 0.01

    def __post_init__(self):
        missing = [t for t in TERM_NAMES if t not in self.weights]
        extra = [t for t in self.weights if t not in TERM_NAMES]
        if missing or extra:
            raise ConfigError(f"reward weights mismatch: missing={missing} unknown={extra}")
        for label in (
            "least_feet_distance",
            "most_feet_distance",
            "least_knee_distance",
            "most_knee_distance",
            "clearance_height_target",
            "max_contact_force",
        ):
            if not getattr(self, label) > 0:
                raise ConfigError(f"RewardConfig.{label} must be > 0")


def load_reward_file(path: str | Path) -> RewardConfig:
    with open(path, "r", encoding="utf-8") as f:
        doc = yaml.safe_load(f)
    return parse_reward(doc)


def parse_reward(doc: dict) -> RewardConfig:
    if not isinstance(doc, dict) or doc.get("schema") != REWARD_SCHEMA:
        raise ConfigError(f"unsupported reward config schema: {doc.get('schema')!r}")
    params = doc.get("params", {})
    try:
        return RewardConfig(
            name=str(doc["name"]),
            weights={str(k): float(v) for k, v in doc["weights"].items()},
            least_feet_distance=float(params["least_feet_distance"]),
            most_feet_distance=float(params["most_feet_distance"]),
            least_knee_distance=float(params["least_knee_distance"]),
            most_knee_distance=float(params["most_knee_distance"]),
            clearance_height_target=float(params["clearance_height_target"]),
            max_contact_force=float(params["max_contact_force"]),
            soft_dof_pos_limit=float(params.get("soft_dof_pos_limit", 0.975)),
            soft_dof_vel_limit=float(params.get("soft_dof_vel_limit", 0.80)),
            soft_torque_limit=float(params.get("soft_torque_limit", 0.95)),
            feet_air_bonus_offset=float(params.get("feet_air_bonus_offset", 0.5)),
            stand_still_eps=float(params.get("stand_still_eps", 0.05)),
        )
    except KeyError as e:
        raise ConfigError(f"reward config missing key {e}") from e


def load_reward(source: str | Path) -> RewardConfig:
    """Resolve ``source`` as a preset name ('g1'/'gr1') or a YAML file path."""
    if isinstance(source, str) and source in PRESET_NAMES:
        text = resources.files("teleopsim.presets").joinpath(f"reward_{source}.yaml").read_text(encoding="utf-8")
        return parse_reward(yaml.safe_load(text))
    p = Path(source)
    if p.exists():
        return load_reward_file(p)
    raise NotFoundError(f"reward config {source!r} is neither a preset nor an existing file")


@dataclass
class RewardBreakdown:
    """Per-term (raw, weighted) values and the weighted total for one tick."""

    terms: dict[str, tuple[float, float]]
    total: float


def r_knee(h_r: float, h_t: float, q_knee: float, q_min: float, q_max: float) -> float:
    """Height-error / knee-flexion coupling term for a single knee.

    Always <= 0; zero exactly when the height error is zero or the knee sits
    at the midpoint of its range.
    """
    if q_min == q_max:
        raise ConfigError("knee range is empty: q_min == q_max")
    normalized = (q_knee - q_min) / (q_max - q_min)
    return -abs((h_r - h_t) * (normalized - 0.5))


def stand_still_gate(cmd: Command, eps: float = 0.05) -> bool:
    """True when the command asks the robot to hold still (per-component test)."""
    if eps < 0:
        raise ConfigError("eps must be >= 0")
    return abs(cmd.vx) <= eps and abs(cmd.wyaw) <= eps


def _tracking(err_sq: float) -> float:
    return math.exp(-TRACKING_SHARPNESS * err_sq)


def _foot_corners_xy(foot_xy: np.ndarray, yaw: float, length: float, width: float) -> np.ndarray:
    """Four footprint corners in the body xy plane, shape (4, 2)."""
    offsets = np.array(
        [
            [length / 2, width / 2],
            [length / 2, -width / 2],
            [-length / 2, width / 2],
            [-length / 2, -width / 2],
        ]
    )
    c, s = math.cos(yaw), math.sin(yaw)
    rot = np.array([[c, -s], [s, c]])
    return foot_xy + offsets @ rot.T


class RewardEngine:
    """Evaluates the full reward table for one plant instance.

    ``pd_reference`` must match the plant's torque mode so recomputed torques
    agree with what was actually applied.
    """

    def __init__(self, desc: RobotDescription, cfg: RewardConfig, pd_reference: str = "current"):
        self.desc = desc
        self.cfg = cfg
        self.pd_reference = pd_reference
        self.reset()

    def reset(self, initial_contact: np.ndarray | None = None) -> None:
        """Clear the per-episode air-time tracker (call at episode start)."""
        self.air_time = np.zeros(2)
        self.prev_contact = (
            np.ones(2, dtype=bool) if initial_contact is None else np.asarray(initial_contact, dtype=bool).copy()
        )

    # -- helpers -------------------------------------------------------------------

    def _full_targets(self, act: ActionCommand) -> np.ndarray:
        desc = self.desc
        targets = np.zeros(desc.n_joints)
        targets[desc.lower_indices] = act.lower_targets
        targets[desc.upper_indices] = act.upper_targets
        return targets

    def _torques(self, state: RobotState, act: ActionCommand) -> np.ndarray:
        desc = self.desc
        targets = np.clip(self._full_targets(act), desc.pos_min, desc.pos_max)
        anchor = desc.default_pos if self.pd_reference == "default" else state.q
        tau = desc.kp * (targets - anchor) - desc.kd * state.qd
        return np.clip(tau, -desc.torque_max, desc.torque_max)

    def _corner_heights(self, state: RobotState, foot: int) -> np.ndarray:
        desc, cfg = self.desc, self.cfg
        li = desc.leg_indices
        q = state.q
        pitch = q[li.hip_pitch[foot]] + q[li.knee[foot]] + q[li.ankle_pitch[foot]]
        roll = q[li.hip_roll[foot]] + q[li.ankle_roll[foot]]
        long_off = np.array([1, 1, -1, -1]) * (cfg.footprint_length / 2)
        lat_off = np.array([1, -1, 1, -1]) * (cfg.footprint_width / 2)
        return state.foot_pos[foot, 2] + long_off * math.sin(pitch) + lat_off * math.sin(roll)

    def _knee_lateral(self, state: RobotState) -> float:
        desc = self.desc
        li = desc.leg_indices
        y = self.cfg.stance_half_width * np.array([1.0, -1.0]) + desc.thigh_len * np.sin(state.q[li.hip_roll])
        return float(abs(y[0] - y[1]))

    @staticmethod
    def _band(d: float, d_min: float, d_max: float) -> float:
        return min(d - d_min, 0.0) + min(d_max - d, 0.0)

    # -- evaluation ------------------------------------------------------------------

    def evaluate(
        self,
        state: RobotState,
        prev: RobotState,
        prev2: RobotState,
        cmd: Command,
        act: ActionCommand,
        act_prev: ActionCommand,
        act_prev2: ActionCommand,
    ) -> RewardBreakdown:
        desc, cfg = self.desc, self.cfg
        if state.foot_contact is None or state.foot_contact.shape[-1] != 2:
            raise ConfigError("missing contact data: foot_contact must cover both feet")
        dt = state.t - prev.t
        if dt <= 0:
            raise ConfigError("states must be consecutive (state.t > prev.t)")

        a_t = np.asarray(act.lower_targets, dtype=float)
        a_p = np.asarray(act_prev.lower_targets, dtype=float)
        a_pp = np.asarray(act_prev2.lower_targets, dtype=float)
        tau = self._torques(state, act)
        contact = state.foot_contact.astype(bool)

        # Air-time tracking with a one-tick debounce on the landing edge:
        # t_air is the accumulated airborne time at the moment of landing.
        t_air = self.air_time.copy()
        first_contact = contact & ~self.prev_contact & (t_air >= 2 * dt - 1e-12)
        self.air_time = np.where(contact, 0.0, self.air_time + dt)

        raw: dict[str, float] = {}
        raw["x_vel_tracking"] = _tracking((float(state.base_vel[0]) - cmd.vx) ** 2)
        raw["y_vel_tracking"] = _tracking(float(state.base_vel[1]) ** 2)
        raw["ang_vel_tracking"] = _tracking((float(state.base_yaw_rate) - cmd.wyaw) ** 2)
        raw["base_height_tracking"] = _tracking((cmd.height - float(state.base_height)) ** 2)
        raw["lin_vel_z"] = float(state.base_vel[2]) ** 2
        raw["ang_vel_xy"] = float(np.sum(state.omega_body[:2] ** 2))
        raw["orientation"] = float(state.gravity_proj[0] ** 2 + state.gravity_proj[1] ** 2)
        raw["action_rate"] = float(np.sum((a_t - a_p) ** 2))
        raw["hip_deviation"] = float(np.sum((state.q[desc.hip_indices] - desc.default_pos[desc.hip_indices]) ** 2))
        raw["ankle_deviation"] = float(
            np.sum((state.q[desc.ankle_indices] - desc.default_pos[desc.ankle_indices]) ** 2)
        )
        raw["squat_knee"] = float(
            np.mean(
                [
                    r_knee(
                        float(state.base_height),
                        cmd.height,
                        float(state.q[k]),
                        desc.joints[k].pos_min,
                        desc.joints[k].pos_max,
                    )
                    for k in desc.knee_indices
                ]
            )
        )
        raw["dof_acc"] = float(np.sum((state.qd - prev.qd) ** 2) / dt)

        mid = 0.5 * (desc.pos_max + desc.pos_min)
        half = 0.5 * (desc.pos_max - desc.pos_min) * cfg.soft_dof_pos_limit
        raw["dof_pos_limits"] = float(
            np.sum(np.maximum(mid - half - state.q, 0.0) + np.maximum(state.q - (mid + half), 0.0))
        )

        raw["feet_air_time"] = float(np.sum((t_air - cfg.feet_air_bonus_offset) * first_contact))

        foot_vel_xy = (state.foot_pos[:, :2] - prev.foot_pos[:, :2]) / dt
        foot_speed_xy = np.linalg.norm(foot_vel_xy, axis=-1)
        raw["feet_clearance"] = float(
            np.sum((cfg.clearance_height_target - state.foot_pos[:, 2]) ** 2 * foot_speed_xy)
        )

        feet_lat = float(abs(state.foot_pos[0, 1] - state.foot_pos[1, 1]))
        raw["feet_lateral_distance"] = self._band(feet_lat, cfg.least_feet_distance, cfg.most_feet_distance)
        raw["knee_lateral_distance"] = self._band(
            self._knee_lateral(state), cfg.least_knee_distance, cfg.most_knee_distance
        )

        corner_heights = [self._corner_heights(state, i) for i in (0, 1)]
        raw["feet_ground_parallel"] = float(sum(np.var(h) for h in corner_heights))

        li = desc.leg_indices
        corners = [
            _foot_corners_xy(
                state.foot_pos[i, :2], float(state.q[li.hip_yaw[i]]), cfg.footprint_length, cfg.footprint_width
            )
            for i in (0, 1)
        ]
        dists = np.linalg.norm(corners[0] - corners[1], axis=-1)
        raw["feet_parallel"] = float(np.var(dists))

        raw["smoothness"] = float(np.sum((a_t - 2 * a_p + a_pp) ** 2))

        denom = max(float(np.sum(state.base_vel**2)) + 0.2 * float(np.sum(state.omega_body**2)), cfg.power_floor)
        raw["joint_power"] = float(np.sum(np.abs(tau * state.qd))) / denom

        raw["feet_stumble"] = float(np.any(state.foot_force_xy > 3.0 * np.abs(state.foot_force_z)))
        raw["torques"] = float(np.sum((tau / desc.kp) ** 2))
        raw["dof_vel"] = float(np.sum(state.qd**2))
        raw["dof_vel_limits"] = float(
            np.sum(np.maximum(np.abs(state.qd) - desc.vel_max * cfg.soft_dof_vel_limit, 0.0))
        )
        raw["torque_limits"] = float(
            np.sum(np.maximum(np.abs(tau) - desc.torque_max * cfg.soft_torque_limit, 0.0))
        )
        raw["no_fly"] = float(int(contact.sum()) == 1)
        raw["joint_tracking_error"] = float(np.sum((state.q - self._full_targets(act)) ** 2))
        raw["feet_slip"] = float(np.sum(foot_speed_xy * (contact & ~first_contact)))
        raw["feet_contact_force"] = float(np.sum(np.maximum(state.foot_force_z - cfg.max_contact_force, 0.0)))

        foot_vel_z = (state.foot_pos[:, 2] - prev.foot_pos[:, 2]) / dt
        raw["contact_momentum"] = float(np.sum(np.abs(foot_vel_z * state.foot_force_z)))

        lo = desc.pos_min[desc.lower_indices]
        hi = desc.pos_max[desc.lower_indices]
        raw["action_vanish"] = float(np.sum(np.maximum(a_t - hi, 0.0) + np.maximum(lo - a_t, 0.0)))

        raw["stand_still"] = float((~contact).sum()) * float(stand_still_gate(cmd, cfg.stand_still_eps))

        self.prev_contact = contact.copy()

        terms = {name: (raw[name], cfg.weights[name] * raw[name]) for name in TERM_NAMES}
        total = math.fsum(w for _, w in terms.values())
        return RewardBreakdown(terms=terms, total=total)
