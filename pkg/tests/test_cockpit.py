import math

import numpy as np
import pytest

from teleopsim.cockpit import (
    GLOVE_CHANNELS,
    CalibrationEntry,
    PedalConfig,
    PedalToggles,
    calibrate,
    glove_angle,
    glove_angle_checked,
    pedal_command,
    pot_travel_fraction,
)
from teleopsim.errors import ConfigError
from teleopsim.observation import Command


class TestCalibration:
    def test_identity(self):
        assert calibrate(CalibrationEntry(), 0.0) == 0.0

    def test_quarter_turn_offset(self):
        # sign +1, k=1, n=-1: q = p - pi/2
        assert calibrate(CalibrationEntry(n=-1), 0.5) == pytest.approx(-1.0707963267948966, rel=1e-12)

    def test_flipped_half_turn(self):
        # sign -1, k=1, n=2: q = -(p + pi)
        assert calibrate(CalibrationEntry(sign=-1, n=2), 0.1) == pytest.approx(-3.241592653589793, rel=1e-12)

    def test_affine_property(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            entry = CalibrationEntry(
                sign=int(rng.choice([-1, 1])),
                k=float(rng.uniform(0.5, 2.0)),
                n=int(rng.integers(-4, 5)),
                tau_comp=float(rng.uniform(-1, 1)),
            )
            p1, p2 = rng.uniform(-3, 3, 2)
            lhs = calibrate(entry, p1) - calibrate(entry, p2)
            assert lhs == pytest.approx(entry.sign * entry.k * (p1 - p2), rel=1e-9, abs=1e-12)

    def test_non_integer_offset_rejected(self):
        with pytest.raises(ConfigError):
            CalibrationEntry(n=0.5)

    def test_invalid_sign_rejected(self):
        with pytest.raises(ConfigError):
            CalibrationEntry(sign=2)


class TestGlove:
    def test_zero_counts(self):
        for spec in GLOVE_CHANNELS.values():
            assert glove_angle(spec, 0) == 0.0

    def test_thumb_tip_full_scale(self):
        spec = GLOVE_CHANNELS["thumb_tip_pitch"]
        assert glove_angle(spec, 528) == pytest.approx(65.0, rel=1e-12)

    def test_thumb_tip_linear_midpoint(self):
        spec = GLOVE_CHANNELS["thumb_tip_pitch"]
        assert glove_angle(spec, 264) == pytest.approx(32.5, rel=1e-12)

    def test_linear_accuracy_matches_published_column(self):
        # All rows except other_pad_pitch agree with angle/units to within
        # printing precision; that one row is internally inconsistent in the
        # published table (90/1072 = 0.084, printed 0.088) and is kept verbatim.
        for name, spec in GLOVE_CHANNELS.items():
            derived = spec.accuracy_deg_per_unit
            if name == "other_pad_pitch":
                assert abs(derived - spec.printed_accuracy_deg) > 0.003
            else:
                assert abs(derived - spec.printed_accuracy_deg) < 5e-4

    def test_channel_count(self):
        assert len(GLOVE_CHANNELS) == 9
        assert sum(1 for s in GLOVE_CHANNELS.values()) == 9

    def test_exponential_curve_endpoints_and_monotonicity(self):
        import dataclasses

        spec = dataclasses.replace(GLOVE_CHANNELS["other_pad_pitch"], curve="exponential", kappa=3.0)
        assert glove_angle(spec, 0) == 0.0
        assert glove_angle(spec, spec.unit_range) == pytest.approx(spec.angle_range_deg, rel=1e-12)
        vals = [glove_angle(spec, u) for u in range(0, spec.unit_range + 1, 16)]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        # exponential response: first half of travel covers well under half the angle
        assert glove_angle(spec, spec.unit_range // 2) < 0.4 * spec.angle_range_deg

    def test_out_of_range_clamped_and_flagged(self):
        spec = GLOVE_CHANNELS["thumb_tip_pitch"]
        angle, clamped = glove_angle_checked(spec, 600)
        assert clamped and angle == pytest.approx(65.0)
        angle, clamped = glove_angle_checked(spec, -5)
        assert clamped and angle == 0.0
        _, clamped = glove_angle_checked(spec, 100)
        assert not clamped


class TestPedal:
    def test_released_pedals_hold_walking_height(self, g1):
        cmd = pedal_command(0.0, 0.0, 0.0, PedalToggles(), g1)
        assert cmd == Command(0.0, 0.0, g1.height_command_range[1])

    def test_forward_half_press(self, g1):
        cmd = pedal_command(0.5, 0.0, 0.0, PedalToggles(forward=True), g1)
        assert cmd.vx == pytest.approx(0.6)  # 0.5 * 1.20

    def test_backward_full_press(self, g1):
        cmd = pedal_command(1.0, 0.0, 0.0, PedalToggles(forward=False), g1)
        assert cmd.vx == pytest.approx(-0.8)

    def test_turn_toggle_changes_only_sign(self, g1):
        left = pedal_command(0.0, 0.7, 0.0, PedalToggles(left=True), g1)
        right = pedal_command(0.0, 0.7, 0.0, PedalToggles(left=False), g1)
        assert left.wyaw == pytest.approx(-right.wyaw)
        assert left.wyaw > 0

    def test_height_press_lowers(self, g1):
        lo, hi = g1.height_command_range
        top = pedal_command(0.0, 0.0, 0.0, PedalToggles(), g1)
        bottom = pedal_command(0.0, 0.0, 1.0, PedalToggles(), g1)
        assert top.height == pytest.approx(hi)
        assert bottom.height == pytest.approx(lo)

    def test_monotone_and_continuous(self, g1):
        travels = np.linspace(0, 1, 101)
        vx = [pedal_command(t, 0, 0, PedalToggles(), g1).vx for t in travels]
        h = [pedal_command(0, 0, t, PedalToggles(), g1).height for t in travels]
        assert all(b >= a for a, b in zip(vx, vx[1:]))
        assert all(b <= a for a, b in zip(h, h[1:]))
        assert max(abs(b - a) for a, b in zip(vx, vx[1:])) < 0.05
        assert max(abs(a - b) for a, b in zip(h, h[1:])) < 0.05

    def test_out_of_range_travel_rejected(self, g1):
        with pytest.raises(ConfigError):
            pedal_command(1.2, 0.0, 0.0, PedalToggles(), g1)

    def test_pot_geometry(self):
        cfg = PedalConfig()
        assert cfg.pot_range_deg == 270.0 and cfg.travel_deg == 40.0
        assert pot_travel_fraction(cfg, 0) == 0.0
        # 40 deg of 270 deg over 4095 counts saturates the pedal travel
        counts_at_full = 40.0 / 270.0 * 4095
        assert pot_travel_fraction(cfg, counts_at_full) == pytest.approx(1.0, rel=1e-3)
        assert pot_travel_fraction(cfg, 4095) == 1.0

    def test_bad_geometry_rejected(self):
        with pytest.raises(ConfigError):
            PedalConfig(pot_range_deg=30.0, travel_deg=40.0)
