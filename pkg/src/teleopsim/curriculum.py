"""Upper-body pose curriculum and the pose/command resampling schedule.

Difficulty is a single scalar ``upper_ratio`` in [0, 1]. Pose spread values
are drawn from a truncated exponential whose rate is ``20 * (1 -
upper_ratio)``: near 0 the distribution piles up at small values, and as the
ratio grows it flattens, reaching exactly uniform at 1. Sampling uses the
closed-form inverse CDF, so the density below is the exact law of the
samples. Per resample event one spread value is drawn, then each upper joint
draws its ratio uniformly in [0, spread].

The schedule resamples poses every 1 s and commands every 4 s; at each
command resample one third of draws enter squat mode (zero velocities,
height sampled in the reachable squat window) and the rest walk mode
(walking-height target, velocities sampled in the command ranges). Between
pose resamples the emitted joint angles ramp linearly from the previously
emitted value to the new target over exactly the pose interval, so the
emitted trajectory is continuous across resample boundaries.

Promotion bumps ``upper_ratio`` by ``step_increment`` whenever the batch
mean of the forward-velocity tracking reward reaches the threshold; it never
decreases. Promotion events are logged as structured records on the module
logger.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .observation import Command
from .robot import RobotDescription

logger = logging.getLogger(__name__)

RATE_SCALE = 20.0
POSE_INTERVAL = 1.0
COMMAND_INTERVAL = 4.0
SQUAT_FRACTION = 1.0 / 3.0


@dataclass(frozen=True)
class CurriculumState:
    """Difficulty scalar plus promotion parameters; monotone non-decreasing."""

    upper_ratio: float = 0.0
    step_increment: float = 0.05
    promotion_threshold: float = 0.8

    def __post_init__(self):
        if not 0.0 <= self.upper_ratio <= 1.0:
            raise ConfigError(f"upper_ratio must be in [0, 1], got {self.upper_ratio}")


def maybe_promote(cur: CurriculumState, mean_xvel_reward: float) -> CurriculumState:
    """Bump the ratio by one increment (capped at 1) iff the reward reached threshold."""
    if mean_xvel_reward >= cur.promotion_threshold:
        new_ratio = min(1.0, cur.upper_ratio + cur.step_increment)
        if new_ratio != cur.upper_ratio:
            logger.info(json.dumps({"event": "curriculum-promotion", "upper_ratio": new_ratio}))
        return replace(cur, upper_ratio=new_ratio)
    return cur


def _rate(upper_ratio: float) -> float:
    return RATE_SCALE * (1.0 - upper_ratio)


def sample_spread(upper_ratio: float, u1):
    """Inverse-CDF draw of the pose spread given uniform(0,1) input ``u1``.

    At ``upper_ratio == 1`` the analytic uniform limit is used directly
    instead of evaluating the 0/0 rate.
    """
    u1 = np.asarray(u1, dtype=float)
    if not 0.0 <= upper_ratio <= 1.0:
        raise ConfigError(f"upper_ratio must be in [0, 1], got {upper_ratio}")
    if upper_ratio == 1.0:
        return u1 if u1.shape else float(u1)
    lam = _rate(upper_ratio)
    out = -np.log1p(-u1 * (1.0 - np.exp(-lam))) / lam
    return out if out.shape else float(out)


def sample_ratio(upper_ratio: float, u1, u2):
    """Joint ratio draw: uniform in [0, spread(u1)]. Always <= the spread."""
    return np.asarray(u2, dtype=float) * sample_spread(upper_ratio, u1)


def spread_pdf(upper_ratio: float, x):
    """Density of the spread distribution on [0, 1]; integrates to 1."""
    x = np.asarray(x, dtype=float)
    if not 0.0 <= upper_ratio <= 1.0:
        raise ConfigError(f"upper_ratio must be in [0, 1], got {upper_ratio}")
    if upper_ratio == 1.0:
        out = np.ones_like(x)
    else:
        lam = _rate(upper_ratio)
        out = lam * np.exp(-lam * x) / (1.0 - np.exp(-lam))
    return out if out.shape else float(out)


def spread_cdf(upper_ratio: float, x):
    """CDF of the spread distribution (the exact law of sample_spread)."""
    x = np.asarray(x, dtype=float)
    if upper_ratio == 1.0:
        out = np.clip(x, 0.0, 1.0)
    else:
        lam = _rate(upper_ratio)
        out = np.clip(-np.expm1(-lam * np.clip(x, 0.0, 1.0)) / -np.expm1(-lam), 0.0, 1.0)
    return out if out.shape else float(out)


@dataclass(frozen=True)
class PoseTarget:
    """One sampled upper-body pose: per-joint ratios and mapped joint angles."""

    ratios: np.ndarray
    angles: np.ndarray
    hold_start: float
    interp_duration: float = POSE_INTERVAL


@dataclass
class ScheduleTick:
    """Output of one scheduler tick."""

    t: float
    upper_angles: np.ndarray
    cmd: Command
    pose_resampled: bool
    cmd_resampled: bool
    squat_mode: bool


class PoseScheduler:
    """Per-environment pose/command schedule driven by integer control ticks.

    Tick ``k`` corresponds to ``t = k / control_hz``; pose resamples fire at
    exact multiples of the pose interval (t > 0), command resamples at exact
    multiples of the command interval. The emitted angles at the resample
    tick itself are the previous ramp's endpoint, so the trajectory stays
    continuous.
    """

    def __init__(
        self,
        desc: RobotDescription,
        rng: np.random.Generator,
        curriculum: CurriculumState | None = None,
        control_hz: float = 50.0,
        pose_interval: float = POSE_INTERVAL,
        cmd_interval: float = COMMAND_INTERVAL,
        squat_fraction: float = SQUAT_FRACTION,
    ):
        self.desc = desc
        self.rng = rng
        self.curriculum = curriculum or CurriculumState(upper_ratio=1.0)
        self.control_hz = control_hz
        self.pose_every = round(pose_interval * control_hz)
        self.cmd_every = round(cmd_interval * control_hz)
        if self.pose_every < 1 or self.cmd_every < 1:
            raise ConfigError("resample intervals must be at least one control tick")
        self.squat_fraction = squat_fraction

        upper = desc.upper_indices
        self._defaults = desc.default_pos[upper].copy()
        self._lo = desc.pos_min[upper].copy()
        self._hi = desc.pos_max[upper].copy()
        # Amplitude to the limit farther from default; direction resampled each event.
        self._amplitude = np.maximum(self._hi - self._defaults, self._defaults - self._lo)

        self.emitted = self._defaults.copy()
        self.ramp_from = self._defaults.copy()
        self.target = PoseTarget(
            ratios=np.zeros(len(upper)), angles=self._defaults.copy(), hold_start=0.0
        )
        self.cmd = Command(0.0, 0.0, desc.height_target_walk)
        self.squat_mode = False

    # -- sampling -------------------------------------------------------------------

    def sample_pose(self, t: float) -> PoseTarget:
        spread = sample_spread(self.curriculum.upper_ratio, self.rng.random())
        ratios = self.rng.random(len(self._defaults)) * spread
        direction = self.rng.choice([-1.0, 1.0], size=len(self._defaults))
        angles = np.clip(self._defaults + direction * ratios * self._amplitude, self._lo, self._hi)
        return PoseTarget(ratios=ratios, angles=angles, hold_start=t)

    def sample_command(self) -> tuple[Command, bool]:
        squat = bool(self.rng.random() < self.squat_fraction)
        if squat:
            h = float(self.rng.uniform(*self.desc.height_command_range))
            return Command(0.0, 0.0, h), True
        return (
            Command(
                vx=float(self.rng.uniform(*self.desc.vx_range)),
                wyaw=float(self.rng.uniform(*self.desc.wyaw_range)),
                height=self.desc.height_target_walk,
            ),
            False,
        )

    # -- stepping --------------------------------------------------------------------

    def tick(self, k: int) -> ScheduleTick:
        t = k / self.control_hz
        # Emit from the current ramp first: at a resample tick the old ramp has
        # just completed (frac = 1), and the new ramp starts from that value,
        # keeping the emitted trajectory continuous.
        frac = min(max(t - self.target.hold_start, 0.0) / self.target.interp_duration, 1.0)
        self.emitted = self.ramp_from + frac * (self.target.angles - self.ramp_from)

        pose_resampled = k > 0 and k % self.pose_every == 0
        cmd_resampled = k > 0 and k % self.cmd_every == 0
        if pose_resampled:
            self.ramp_from = self.emitted.copy()
            self.target = self.sample_pose(t)
        if cmd_resampled:
            self.cmd, self.squat_mode = self.sample_command()
        return ScheduleTick(
            t=t,
            upper_angles=self.emitted.copy(),
            cmd=self.cmd,
            pose_resampled=pose_resampled,
            cmd_resampled=cmd_resampled,
            squat_mode=self.squat_mode,
        )
