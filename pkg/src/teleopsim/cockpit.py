"""Cockpit-side signal mappings: exoskeleton calibration, glove channels, pedal.

No hardware I/O lives here; these are the pure mappings from raw readings
(servo angles, Hall-sensor counts, potentiometer travel) to robot-side
quantities. Real serial drivers are out of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .observation import Command
from .robot import RobotDescription

# 12-bit readout over the potentiometer's full mechanical range.
ADC_COUNTS = 4096


@dataclass(frozen=True)
class CalibrationEntry:
    """Affine map from an exoskeleton servo angle to a robot joint angle.

    The mounting offset is always an integer multiple of a quarter turn
    (the servo disc has four symmetric holes), so it is stored as the
    integer ``n`` rather than a free angle. ``k`` rescales and ``sign``
    flips the direction; ``tau_comp`` is an additional fixed compensation.
    The stock mapping uses k = 1 and tau_comp = 0.
    """

    sign: int = 1
    k: float = 1.0
    n: int = 0
    tau_comp: float = 0.0

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ConfigError("calibration sign must be +1 or -1")
        if not isinstance(self.n, int):
            raise ConfigError("calibration offset n must be an integer (multiples of pi/2)")


def calibrate(entry: CalibrationEntry, p: float) -> float:
    """Map a servo reading ``p`` (radians) to the robot joint angle."""
    return entry.sign * entry.k * (p + entry.n * math.pi / 2.0) + entry.tau_comp


@dataclass(frozen=True)
class GloveChannelSpec:
    """One Hall-sensor channel of the motion-sensing glove.

    ``printed_accuracy_deg`` is the published degrees-per-unit figure for
    the channel; the actual linear accuracy is ``angle_range_deg /
    unit_range``. The finger-pitch channels respond exponentially near the
    fist end of travel, modelled by the ``exponential`` curve with shape
    ``kappa``.
    """

    channel: str
    angle_range_deg: float
    unit_range: int
    printed_accuracy_deg: float
    curve: str = "linear"
    kappa: float = 3.0

    def __post_init__(self):
        if self.curve not in ("linear", "exponential"):
            raise ConfigError(f"unknown glove curve {self.curve!r}")
        if self.unit_range <= 0 or self.angle_range_deg <= 0:
            raise ConfigError("glove ranges must be positive")

    @property
    def accuracy_deg_per_unit(self) -> float:
        return self.angle_range_deg / self.unit_range


# Published channel table: three sensors per finger class (tip pitch, pad
# pitch, pad yaw), identical for both gloves. The pad-pitch row of the
# index/middle/ring class prints 0.088 deg/unit, which is inconsistent with
# its own 90 deg / 1072 units = 0.084; the printed value is kept verbatim.
GLOVE_CHANNELS: dict[str, GloveChannelSpec] = {
    s.channel: s
    for s in (
        GloveChannelSpec("thumb_tip_pitch", 65.0, 528, 0.123),
        GloveChannelSpec("thumb_pad_pitch", 100.0, 1024, 0.098),
        GloveChannelSpec("thumb_pad_yaw", 90.0, 832, 0.108),
        GloveChannelSpec("pinky_tip_pitch", 70.0, 880, 0.080),
        GloveChannelSpec("pinky_pad_pitch", 90.0, 1136, 0.079),
        GloveChannelSpec("pinky_pad_yaw", 45.0, 416, 0.108),
        GloveChannelSpec("other_tip_pitch", 70.0, 928, 0.075),
        GloveChannelSpec("other_pad_pitch", 90.0, 1072, 0.088),
        GloveChannelSpec("other_pad_yaw", 40.0, 512, 0.078),
    )
}


def glove_angle_checked(spec: GloveChannelSpec, units: float) -> tuple[float, bool]:
    """Map sensor counts to degrees; returns (angle, was_clamped)."""
    clamped = not 0 <= units <= spec.unit_range
    u = min(max(units, 0.0), float(spec.unit_range))
    if spec.curve == "linear":
        angle = u * spec.angle_range_deg / spec.unit_range
    else:
        angle = spec.angle_range_deg * math.expm1(spec.kappa * u / spec.unit_range) / math.expm1(spec.kappa)
    return angle, clamped


def glove_angle(spec: GloveChannelSpec, units: float) -> float:
    return glove_angle_checked(spec, units)[0]


@dataclass(frozen=True)
class PedalConfig:
    """Geometry of one small pedal: potentiometer range vs usable travel."""

    pot_range_deg: float = 270.0
    travel_deg: float = 40.0

    def __post_init__(self):
        if not 0 < self.travel_deg <= self.pot_range_deg:
            raise ConfigError("need 0 < travel_deg <= pot_range_deg")


def pot_travel_fraction(cfg: PedalConfig, counts: float) -> float:
    """Travel fraction in [0, 1] from a raw 12-bit potentiometer reading."""
    angle = min(max(counts, 0.0), ADC_COUNTS - 1.0) / (ADC_COUNTS - 1.0) * cfg.pot_range_deg
    return min(angle / cfg.travel_deg, 1.0)


@dataclass(frozen=True)
class PedalToggles:
    """Latched direction modes from the two foot switches."""

    forward: bool = True
    left: bool = True


def pedal_command(
    velocity_travel: float,
    turn_travel: float,
    height_travel: float,
    toggles: PedalToggles,
    desc: RobotDescription,
    cfg: PedalConfig | None = None,
) -> Command:
    """Map pedal travel fractions and direction toggles to a robot command.

    The velocity pedal scales to the robot's forward range when the forward
    toggle is set and to the (typically smaller) backward range otherwise;
    the turn pedal is analogous with left = positive yaw. Pressing the
    height pedal lowers the robot from the walking height toward the bottom
    of the reachable squat window.
    """
    del cfg  # geometry only affects pot_travel_fraction; fractions arrive resolved
    for label, v in (("velocity", velocity_travel), ("turn", turn_travel), ("height", height_travel)):
        if not 0.0 <= v <= 1.0:
            raise ConfigError(f"{label} travel fraction must be in [0, 1], got {v}")
    vx = velocity_travel * (desc.vx_range[1] if toggles.forward else desc.vx_range[0])
    wyaw = turn_travel * (desc.wyaw_range[1] if toggles.left else desc.wyaw_range[0])
    h_lo, h_hi = desc.height_command_range
    height = h_hi - height_travel * (h_hi - h_lo)
    return Command(vx=float(vx), wyaw=float(wyaw), height=float(height))
