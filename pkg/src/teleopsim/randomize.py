"""Domain randomization: per-episode physical perturbations and observation noise.

Every row is a uniform draw from a (lo, hi) range; the defaults reproduce the
published randomization table (pinned by ``golden/randomization_ranges.json``).
Rows classified as scales multiply, rows classified as offsets add.

Per-episode quantities (payloads, mass/gain scales, CoM offset, friction,
restitution, initial pose) are drawn once at reset and returned as an explicit
record. Friction and restitution have no effect on the surrogate plant (it has
no contact solver); they are stored and logged so reward terms and future
plants can consume them. Push velocity is drawn per push event by the plant's
schedule; this module only supplies the range.

Observation noise is additive uniform on the joint position, joint velocity,
body rate and gravity slots of a frame; command and last-action slots are
never touched. The default mode draws i.i.d. noise per step; ``bias`` mode
draws one offset vector per episode instead.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import ConfigError
from .observation import FrameLayout
from .plant import JointGains, PlantConfig, nominal_gains
from .robot import RobotDescription

Range = tuple[float, float]

OBS_NOISE_MODES = ("iid", "bias")


@dataclass(frozen=True)
class RandomizationConfig:
    """One (lo, hi) range per randomization row; defaults match the published table."""

    actuation_offset: Range = (-0.05, 0.05)
    torso_payload: Range = (-5.0, 10.0)
    hand_payload: Range = (-0.1, 0.3)
    com_displacement: Range = (-0.1, 0.1)
    link_mass_scale: Range = (0.8, 1.2)
    friction: Range = (0.1, 2.0)
    restitution: Range = (0.0, 1.0)
    kp_scale: Range = (0.9, 1.1)
    kd_scale: Range = (0.9, 1.1)
    init_pos_scale: Range = (0.8, 1.2)
    init_pos_offset: Range = (-0.1, 0.1)
    push_vel: Range = (-0.5, 0.5)
    obs_noise_dof_pos: Range = (-0.02, 0.02)
    obs_noise_dof_vel: Range = (-2.0, 2.0)
    obs_noise_ang_vel: Range = (-0.5, 0.5)
    obs_noise_gravity: Range = (-0.05, 0.05)
    obs_noise_mode: str = "iid"

    def __post_init__(self):
        for f in fields(self):
            if f.name == "obs_noise_mode":
                continue
            lo, hi = getattr(self, f.name)
            if lo > hi:
                raise ConfigError(f"RandomizationConfig.{f.name}: lo {lo} > hi {hi}")
        if self.obs_noise_mode not in OBS_NOISE_MODES:
            raise ConfigError(f"obs_noise_mode must be one of {OBS_NOISE_MODES}")

    @classmethod
    def identity(cls) -> "RandomizationConfig":
        """All offsets collapsed to 0, all scales collapsed to 1: a no-op draw."""
        return cls(
            actuation_offset=(0.0, 0.0),
            torso_payload=(0.0, 0.0),
            hand_payload=(0.0, 0.0),
            com_displacement=(0.0, 0.0),
            link_mass_scale=(1.0, 1.0),
            friction=(1.0, 1.0),
            restitution=(0.0, 0.0),
            kp_scale=(1.0, 1.0),
            kd_scale=(1.0, 1.0),
            init_pos_scale=(1.0, 1.0),
            init_pos_offset=(0.0, 0.0),
            push_vel=(0.0, 0.0),
            obs_noise_dof_pos=(0.0, 0.0),
            obs_noise_dof_vel=(0.0, 0.0),
            obs_noise_ang_vel=(0.0, 0.0),
            obs_noise_gravity=(0.0, 0.0),
        )

    @classmethod
    def from_dict(cls, doc: dict) -> "RandomizationConfig":
        """Build from a run-config section; unknown keys are rejected."""
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown randomization keys: {sorted(unknown)}")
        kwargs = {}
        for k, v in doc.items():
            kwargs[k] = str(v) if k == "obs_noise_mode" else (float(v[0]), float(v[1]))
        return cls(**kwargs)


@dataclass
class ObsBias:
    """Per-episode observation noise offsets (bias mode only)."""

    q: np.ndarray
    qd: np.ndarray
    omega: np.ndarray
    gravity: np.ndarray


@dataclass
class EpisodeRandomization:
    """Explicit record of everything drawn at one episode reset."""

    actuation_offset: np.ndarray
    torso_payload: float
    hand_payload: np.ndarray
    com_displacement: np.ndarray
    link_mass_scale: np.ndarray
    friction: float
    restitution: float
    kp_scale: np.ndarray
    kd_scale: np.ndarray
    init_q: np.ndarray
    obs_bias: ObsBias | None = None


def sample_episode(
    desc: RobotDescription, cfg: RandomizationConfig, rng: np.random.Generator
) -> EpisodeRandomization:
    """Draw the per-episode randomization record (applied once at reset)."""
    nj = desc.n_joints
    init_q = np.clip(
        desc.default_pos * rng.uniform(*cfg.init_pos_scale, size=nj)
        + rng.uniform(*cfg.init_pos_offset, size=nj),
        desc.pos_min,
        desc.pos_max,
    )
    bias = None
    if cfg.obs_noise_mode == "bias":
        bias = ObsBias(
            q=rng.uniform(*cfg.obs_noise_dof_pos, size=nj),
            qd=rng.uniform(*cfg.obs_noise_dof_vel, size=nj),
            omega=rng.uniform(*cfg.obs_noise_ang_vel, size=3),
            gravity=rng.uniform(*cfg.obs_noise_gravity, size=3),
        )
    return EpisodeRandomization(
        actuation_offset=rng.uniform(*cfg.actuation_offset, size=nj),
        torso_payload=float(rng.uniform(*cfg.torso_payload)),
        hand_payload=rng.uniform(*cfg.hand_payload, size=2),
        com_displacement=rng.uniform(*cfg.com_displacement, size=3),
        link_mass_scale=rng.uniform(*cfg.link_mass_scale, size=nj),
        friction=float(rng.uniform(*cfg.friction)),
        restitution=float(rng.uniform(*cfg.restitution)),
        kp_scale=rng.uniform(*cfg.kp_scale, size=nj),
        kd_scale=rng.uniform(*cfg.kd_scale, size=nj),
        init_q=init_q,
        obs_bias=bias,
    )


def episode_gains(desc: RobotDescription, plant_cfg: PlantConfig, rand: EpisodeRandomization) -> JointGains:
    """Effective actuation parameters for the plant under one episode's draw."""
    base = nominal_gains(desc, plant_cfg)
    return JointGains(
        kp=base.kp * rand.kp_scale,
        kd=base.kd * rand.kd_scale,
        inertia=base.inertia * rand.link_mass_scale,
        torque_offset=rand.actuation_offset.copy(),
    )


def noisy_observation(
    frame: np.ndarray,
    layout: FrameLayout,
    cfg: RandomizationConfig,
    rng: np.random.Generator | None = None,
    bias: ObsBias | None = None,
) -> np.ndarray:
    """Additive uniform noise on the q/qd/rates/gravity slots of one frame.

    Command and last-action slots pass through untouched. In i.i.d. mode
    (the default) fresh noise is drawn from ``rng``; in bias mode the
    per-episode offsets are applied instead.
    """
    frame = np.asarray(frame, dtype=float)
    out = frame.copy()
    if cfg.obs_noise_mode == "bias":
        if bias is None:
            raise ConfigError("bias mode requires the episode's ObsBias")
        out[layout.q] += bias.q
        out[layout.qd] += bias.qd
        out[layout.omega] += bias.omega
        out[layout.gravity] += bias.gravity
        return out
    if rng is None:
        raise ConfigError("iid mode requires an RNG")
    out[layout.q] += rng.uniform(*cfg.obs_noise_dof_pos, size=layout.n_joints)
    out[layout.qd] += rng.uniform(*cfg.obs_noise_dof_vel, size=layout.n_joints)
    out[layout.omega] += rng.uniform(*cfg.obs_noise_ang_vel, size=3)
    out[layout.gravity] += rng.uniform(*cfg.obs_noise_gravity, size=3)
    return out
