"""Robot descriptions: joint inventory, limits, gains, mirror structure, presets.

A description is loaded from a YAML file (schema ``robot-description/1``).
All angles are radians, lengths are meters, velocities rad/s, torques N*m,
gains N*m/rad and N*m*s/rad. Top-level keys:

``schema``
    Must be ``robot-description/1``.
``name``
    Identifier for the robot.
``geometry``
    ``thigh_len``, ``shank_len``, ``pelvis_offset`` for the two-link leg
    model. Standing base height = pelvis_offset + thigh_len + shank_len.
``mass``
    Total robot mass in kg (used only to synthesize contact forces).
``height_target_walk``
    Commanded base height while walking.
``squat_height_range``
    ``[min, max]`` base-height command range as published for the robot.
    The plant additionally clamps commanded height to
    ``[0.2 * height_target_walk, height_target_walk]`` because some
    published lower bounds are not physically reachable.
``cmd_ranges``
    ``vx``, ``vy``, ``wyaw`` each ``[lo, hi]``.
``ankle_kp_scale``
    Factor applied to the position gain of ankle joints at actuation time
    (softer ankles improve stand-still behaviour); the raw ``kp`` stays in
    the joint table.
``joints``
    Ordered list. Each entry:
    ``{name, group, side, mirror, pos: [lo, hi], vel_max, torque_max,
    kp, kd, default}``. ``group`` is one of ``lower | waist | upper-arm |
    hand``; ``side`` is ``left | right | center``; ``mirror`` is
    ``keep | flip`` (sign rule under reflection across the robot's x-z
    plane: pitch-like axes keep their sign, roll/yaw-like axes flip).
    Left/right joints must come in name-matched pairs
    (``left_X`` <-> ``right_X``) with identical parameters.

Two presets ship with the package: ``g1`` (12 lower, 1 waist, 14 arm,
14 hand joints) and ``gr1`` (12 lower, 3 waist, 14 arm, 12 hand).
Descriptions are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError, NotFoundError

GROUPS = ("lower", "waist", "upper-arm", "hand")
SIDES = ("left", "right", "center")
PRESET_NAMES = ("g1", "gr1")

SCHEMA = "robot-description/1"

# Plant-side commanded-height clamp, as a fraction of the walking target.
MIN_HEIGHT_FRACTION = 0.2


@dataclass(frozen=True)
class JointSpec:
    """Static description of one actuated joint."""

    name: str
    group: str
    side: str
    pos_min: float
    pos_max: float
    vel_max: float
    torque_max: float
    kp: float
    kd: float
    default_pos: float = 0.0
    mirror_sign: int = 1  # +1 keep, -1 flip under x-z reflection

    def violations(self) -> list[str]:
        out = []
        if self.group not in GROUPS:
            out.append(f"{self.name}: unknown group {self.group!r}")
        if self.side not in SIDES:
            out.append(f"{self.name}: unknown side {self.side!r}")
        if not self.pos_min < self.pos_max:
            out.append(f"{self.name}: pos_min must be < pos_max")
        if not self.kp > 0:
            out.append(f"{self.name}: kp must be > 0")
        if self.kd < 0:
            out.append(f"{self.name}: kd must be >= 0")
        if not self.vel_max > 0:
            out.append(f"{self.name}: vel_max must be > 0")
        if not self.torque_max > 0:
            out.append(f"{self.name}: torque_max must be > 0")
        if not self.pos_min <= self.default_pos <= self.pos_max:
            out.append(f"{self.name}: default_pos outside [pos_min, pos_max]")
        if self.mirror_sign not in (-1, 1):
            out.append(f"{self.name}: mirror_sign must be +1 or -1")
        return out


@dataclass(frozen=True)
class MirrorEntry:
    """One row of the mirror map: left/right pair or a self-mapped center joint."""

    left: int
    right: int
    sign: int


@dataclass(frozen=True)
class LegIndices:
    """Joint indices of the two-link leg chain, ordered [left, right]."""

    hip_pitch: np.ndarray
    hip_roll: np.ndarray
    hip_yaw: np.ndarray
    knee: np.ndarray
    ankle_pitch: np.ndarray
    ankle_roll: np.ndarray


@dataclass(frozen=True)
class RobotDescription:
    """Immutable robot model shared by the plant, rewards and observation code."""

    name: str
    joints: tuple[JointSpec, ...]
    thigh_len: float
    shank_len: float
    pelvis_offset: float
    mass: float
    height_target_walk: float
    squat_height_range: tuple[float, float]
    vx_range: tuple[float, float]
    vy_range: tuple[float, float]
    wyaw_range: tuple[float, float]
    ankle_kp_scale: float = 1.0

    # ---- counts and index sets -------------------------------------------------

    @property
    def n_joints(self) -> int:
        return len(self.joints)

    @cached_property
    def lower_indices(self) -> np.ndarray:
        return np.array([i for i, j in enumerate(self.joints) if j.group == "lower"], dtype=int)

    @cached_property
    def upper_indices(self) -> np.ndarray:
        return np.array([i for i, j in enumerate(self.joints) if j.group != "lower"], dtype=int)

    @property
    def n_lower(self) -> int:
        return len(self.lower_indices)

    @property
    def n_upper(self) -> int:
        return len(self.upper_indices)

    @cached_property
    def knee_indices(self) -> np.ndarray:
        return np.array([i for i, j in enumerate(self.joints) if "knee" in j.name], dtype=int)

    @cached_property
    def hip_indices(self) -> np.ndarray:
        return np.array([i for i, j in enumerate(self.joints) if "hip" in j.name], dtype=int)

    @cached_property
    def ankle_indices(self) -> np.ndarray:
        return np.array([i for i, j in enumerate(self.joints) if "ankle" in j.name], dtype=int)

    @cached_property
    def arm_indices(self) -> np.ndarray:
        return np.array([i for i, j in enumerate(self.joints) if j.group == "upper-arm"], dtype=int)

    @cached_property
    def hand_indices(self) -> np.ndarray:
        return np.array([i for i, j in enumerate(self.joints) if j.group == "hand"], dtype=int)

    def joint_index(self, name: str) -> int:
        for i, j in enumerate(self.joints):
            if j.name == name:
                return i
        raise NotFoundError(f"no joint named {name!r} in {self.name}")

    @cached_property
    def leg_indices(self) -> LegIndices:
        def pair(role: str) -> np.ndarray:
            return np.array([self.joint_index(f"left_{role}"), self.joint_index(f"right_{role}")])

        try:
            return LegIndices(
                hip_pitch=pair("hip_pitch"),
                hip_roll=pair("hip_roll"),
                hip_yaw=pair("hip_yaw"),
                knee=pair("knee"),
                ankle_pitch=pair("ankle_pitch"),
                ankle_roll=pair("ankle_roll"),
            )
        except NotFoundError as e:
            raise ConfigError(f"{self.name}: incomplete leg chain for kinematics: {e}") from e

    # ---- per-joint parameter arrays ---------------------------------------------

    @cached_property
    def pos_min(self) -> np.ndarray:
        return np.array([j.pos_min for j in self.joints])

    @cached_property
    def pos_max(self) -> np.ndarray:
        return np.array([j.pos_max for j in self.joints])

    @cached_property
    def vel_max(self) -> np.ndarray:
        return np.array([j.vel_max for j in self.joints])

    @cached_property
    def torque_max(self) -> np.ndarray:
        return np.array([j.torque_max for j in self.joints])

    @cached_property
    def kp(self) -> np.ndarray:
        """Effective position gains: raw kp with ankle_kp_scale applied to ankles."""
        kp = np.array([j.kp for j in self.joints])
        kp[self.ankle_indices] *= self.ankle_kp_scale
        return kp

    @cached_property
    def kd(self) -> np.ndarray:
        return np.array([j.kd for j in self.joints])

    @cached_property
    def default_pos(self) -> np.ndarray:
        return np.array([j.default_pos for j in self.joints])

    # ---- mirror structure --------------------------------------------------------

    @cached_property
    def mirror_map(self) -> tuple[MirrorEntry, ...]:
        entries = []
        for i, j in enumerate(self.joints):
            if j.side == "center":
                entries.append(MirrorEntry(i, i, j.mirror_sign))
            elif j.side == "left":
                partner = self.joint_index("right" + j.name[len("left"):])
                entries.append(MirrorEntry(i, partner, j.mirror_sign))
        return tuple(entries)

    @property
    def height_command_range(self) -> tuple[float, float]:
        """Commanded-height window actually accepted by the plant."""
        lo, hi = self.squat_height_range
        return (max(lo, MIN_HEIGHT_FRACTION * self.height_target_walk), min(hi, self.height_target_walk))


def mirror_index_permutation(desc: RobotDescription) -> tuple[np.ndarray, np.ndarray]:
    """Joint permutation and sign vector for reflection across the x-z plane.

    Returns ``(perm, signs)`` such that a mirrored joint vector is
    ``signs * q[perm]``. The permutation swaps left/right pairs and fixes
    center joints; it is an involution.
    """
    perm = np.arange(desc.n_joints)
    signs = np.ones(desc.n_joints)
    for e in desc.mirror_map:
        perm[e.left] = e.right
        perm[e.right] = e.left
        signs[e.left] = e.sign
        signs[e.right] = e.sign
    return perm, signs


def validate(desc: RobotDescription) -> list[str]:
    """Check every description invariant; returns an empty list iff all hold."""
    out: list[str] = []
    names = [j.name for j in desc.joints]
    if len(set(names)) != len(names):
        out.append("duplicate joint names")
    for j in desc.joints:
        out.extend(j.violations())

    # Left/right joints must pair up exactly; pairs share parameters and sign rule.
    lefts = {j.name for j in desc.joints if j.side == "left"}
    rights = {j.name for j in desc.joints if j.side == "right"}
    for name in sorted(lefts):
        partner = "right" + name[len("left"):]
        if not name.startswith("left_") or partner not in rights:
            out.append(f"mirror_map: left joint {name!r} has no right partner")
        else:
            a = desc.joints[desc.joint_index(name)]
            b = desc.joints[desc.joint_index(partner)]
            if a.mirror_sign != b.mirror_sign or a.group != b.group:
                out.append(f"mirror_map: pair {name!r}/{partner!r} disagrees on sign rule or group")
            if a.mirror_sign == -1 and not math.isclose(a.pos_min, -a.pos_max):
                out.append(f"mirror_map: flipped joint {name!r} needs symmetric limits")
    for name in sorted(rights):
        partner = "left" + name[len("right"):]
        if not name.startswith("right_") or partner not in lefts:
            out.append(f"mirror_map: right joint {name!r} has no left partner")

    if not out:
        perm, signs = mirror_index_permutation(desc)
        if not np.array_equal(perm[perm], np.arange(desc.n_joints)):
            out.append("mirror_map: permutation is not an involution")
        for e in desc.mirror_map:
            if desc.joints[e.left].group != desc.joints[e.right].group:
                out.append("mirror_map: pairing crosses joint groups")

    for k in desc.knee_indices:
        if desc.joints[k].group != "lower":
            out.append(f"knee joint {desc.joints[k].name!r} is not in group 'lower'")

    if desc.n_joints != desc.n_lower + desc.n_upper:
        out.append("joint counts: n_joints != n_lower + n_upper")

    for label, (lo, hi) in (
        ("squat_height_range", desc.squat_height_range),
        ("vx_range", desc.vx_range),
        ("vy_range", desc.vy_range),
        ("wyaw_range", desc.wyaw_range),
    ):
        if not lo <= hi:
            out.append(f"{label}: lower bound exceeds upper bound")
    for label, v in (
        ("thigh_len", desc.thigh_len),
        ("shank_len", desc.shank_len),
        ("mass", desc.mass),
        ("height_target_walk", desc.height_target_walk),
    ):
        if not v > 0:
            out.append(f"{label} must be > 0")
    return out


def flags(desc: RobotDescription) -> list[str]:
    """Advisory notes that do not fail validation.

    Published squat ranges sometimes carry physically odd lower bounds; the
    description keeps the printed value and the plant clamps commanded height
    to ``height_command_range`` instead.
    """
    out = []
    lo = desc.squat_height_range[0]
    if lo < MIN_HEIGHT_FRACTION * desc.height_target_walk:
        out.append(
            f"squat_height_range lower bound {lo} is below the reachable window; "
            f"commands clamp to {desc.height_command_range}"
        )
    return out


def _parse_joint(raw: dict) -> JointSpec:
    try:
        pos = raw["pos"]
        return JointSpec(
            name=str(raw["name"]),
            group=str(raw["group"]),
            side=str(raw["side"]),
            pos_min=float(pos[0]),
            pos_max=float(pos[1]),
            vel_max=float(raw["vel_max"]),
            torque_max=float(raw["torque_max"]),
            kp=float(raw["kp"]),
            kd=float(raw["kd"]),
            default_pos=float(raw.get("default", 0.0)),
            mirror_sign={"keep": 1, "flip": -1}[str(raw.get("mirror", "keep"))],
        )
    except KeyError as e:
        raise ConfigError(f"joint entry missing key {e}") from e


def parse_robot(doc: dict) -> RobotDescription:
    """Build a description from a parsed YAML document and validate it."""
    if doc.get("schema") != SCHEMA:
        raise ConfigError(f"unsupported robot description schema: {doc.get('schema')!r}")
    try:
        geo = doc["geometry"]
        cmd = doc["cmd_ranges"]
        desc = RobotDescription(
            name=str(doc["name"]),
            joints=tuple(_parse_joint(j) for j in doc["joints"]),
            thigh_len=float(geo["thigh_len"]),
            shank_len=float(geo["shank_len"]),
            pelvis_offset=float(geo["pelvis_offset"]),
            mass=float(doc["mass"]),
            height_target_walk=float(doc["height_target_walk"]),
            squat_height_range=(float(doc["squat_height_range"][0]), float(doc["squat_height_range"][1])),
            vx_range=(float(cmd["vx"][0]), float(cmd["vx"][1])),
            vy_range=(float(cmd["vy"][0]), float(cmd["vy"][1])),
            wyaw_range=(float(cmd["wyaw"][0]), float(cmd["wyaw"][1])),
            ankle_kp_scale=float(doc.get("ankle_kp_scale", 1.0)),
        )
    except KeyError as e:
        raise ConfigError(f"robot description missing key {e}") from e
    problems = validate(desc)
    if problems:
        raise ConfigError(f"invalid robot description {desc.name!r}: " + "; ".join(problems))
    return desc


def load_robot_file(path: str | Path) -> RobotDescription:
    with open(path, "r", encoding="utf-8") as f:
        doc = yaml.safe_load(f)
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: not a mapping")
    return parse_robot(doc)


def load_preset(name: str) -> RobotDescription:
    """Load one of the built-in presets ('g1' or 'gr1')."""
    if name not in PRESET_NAMES:
        raise NotFoundError(f"unknown robot preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    text = resources.files("teleopsim.presets").joinpath(f"{name}.yaml").read_text(encoding="utf-8")
    return parse_robot(yaml.safe_load(text))


def load_robot(source: str | Path) -> RobotDescription:
    """Resolve ``source`` as a preset name first, then as a file path."""
    if isinstance(source, str) and source in PRESET_NAMES:
        return load_preset(source)
    p = Path(source)
    if p.exists():
        return load_robot_file(p)
    raise NotFoundError(f"robot {source!r} is neither a preset nor an existing file")
