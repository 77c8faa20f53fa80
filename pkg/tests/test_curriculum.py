import math

import numpy as np
import pytest
from scipy.integrate import quad

from teleopsim.curriculum import (
    CurriculumState,
    PoseScheduler,
    maybe_promote,
    sample_ratio,
    sample_spread,
    spread_cdf,
    spread_pdf,
)
from teleopsim.errors import ConfigError
from teleopsim.harness import ks_statistic

# Inverse-CDF value at (ratio=0, u1=0.5), frozen from a high-precision oracle.
SPREAD_AT_HALF = 0.03465735892493958


class TestSampler:
    def test_zero_input_maps_to_zero(self):
        assert sample_spread(0.3, 0.0) == 0.0
        assert sample_ratio(0.3, 0.0, 0.7) == 0.0

    def test_frozen_inverse_cdf_value(self):
        assert sample_spread(0.0, 0.5) == pytest.approx(SPREAD_AT_HALF, rel=1e-12)

    def test_uniform_limit_branch(self):
        u = np.linspace(0, 0.999, 100)
        assert np.array_equal(sample_spread(1.0, u), u)

    def test_ratio_never_exceeds_spread(self):
        rng = np.random.default_rng(0)
        for rho in (0.0, 0.4, 0.9, 1.0):
            u1, u2 = rng.random(1000), rng.random(1000)
            spread = sample_spread(rho, u1)
            ratio = sample_ratio(rho, u1, u2)
            assert np.all(ratio <= spread + 1e-15)
            assert np.all((0.0 <= ratio) & (ratio <= 1.0))

    def test_out_of_range_ratio_rejected(self):
        with pytest.raises(ConfigError):
            sample_spread(1.5, 0.5)


class TestDensity:
    @pytest.mark.parametrize("rho", [0.0, 0.5, 0.9])
    def test_integrates_to_one(self, rho):
        val, _ = quad(lambda x: spread_pdf(rho, x), 0.0, 1.0)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_strictly_positive(self):
        xs = np.linspace(0.0, 1.0, 1001)
        for rho in (0.0, 0.25, 0.5, 0.75, 0.99):
            assert np.all(spread_pdf(rho, xs) > 0.0)

    def test_endpoint_ratio_at_zero_difficulty(self):
        # rate 20 at difficulty 0: density ratio across [0, 1] is e^20.
        assert spread_pdf(0.0, 0.0) / spread_pdf(0.0, 1.0) == pytest.approx(math.exp(20.0), rel=1e-9)

    def test_uniform_at_one(self):
        assert spread_pdf(1.0, 0.3) == 1.0
        assert spread_cdf(1.0, 0.3) == 0.3

    def test_cdf_matches_pdf_quadrature(self):
        for rho in (0.0, 0.6):
            for x in (0.1, 0.42, 0.9):
                val, _ = quad(lambda u: spread_pdf(rho, u), 0.0, x)
                assert spread_cdf(rho, x) == pytest.approx(val, abs=1e-9)

    @pytest.mark.parametrize("rho", [0.0, 0.5, 0.9])
    def test_sampler_matches_density(self, rho):
        rng = np.random.default_rng(7)
        draws = sample_spread(rho, rng.random(100_000))
        assert ks_statistic(draws, lambda x: spread_cdf(rho, x)) < 0.01

    def test_near_one_is_almost_uniform(self):
        rng = np.random.default_rng(8)
        draws = sample_spread(0.999, rng.random(100_000))
        assert ks_statistic(draws, lambda x: np.clip(x, 0, 1)) < 0.01


class TestPromotion:
    def test_promotes_above_threshold(self):
        cur = CurriculumState(upper_ratio=0.0, promotion_threshold=0.8)
        assert maybe_promote(cur, 0.85).upper_ratio == pytest.approx(0.05)

    def test_caps_at_one(self):
        cur = CurriculumState(upper_ratio=1.0)
        assert maybe_promote(cur, 99.0).upper_ratio == 1.0

    def test_holds_below_threshold(self):
        cur = CurriculumState(upper_ratio=0.4)
        assert maybe_promote(cur, 0.5).upper_ratio == 0.4

    def test_never_decreases(self):
        rng = np.random.default_rng(3)
        cur = CurriculumState(upper_ratio=0.0)
        prev = 0.0
        for _ in range(100):
            cur = maybe_promote(cur, float(rng.uniform(0, 1.2)))
            assert cur.upper_ratio >= prev
            prev = cur.upper_ratio

    def test_ratio_bounds_enforced(self):
        with pytest.raises(ConfigError):
            CurriculumState(upper_ratio=1.3)

    def test_promotion_logged_as_structured_record(self, caplog):
        import json
        import logging

        with caplog.at_level(logging.INFO, logger="teleopsim.curriculum"):
            maybe_promote(CurriculumState(upper_ratio=0.2), 0.95)
        events = [json.loads(r.message) for r in caplog.records]
        assert {"event": "curriculum-promotion", "upper_ratio": 0.25} in events


class TestSchedule:
    def test_resample_instants(self, g1):
        sched = PoseScheduler(g1, np.random.default_rng(0))
        pose_times, cmd_times = [], []
        for k in range(0, 451):
            tick = sched.tick(k)
            if tick.pose_resampled:
                pose_times.append(tick.t)
            if tick.cmd_resampled:
                cmd_times.append(tick.t)
        assert pose_times == [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]
        assert cmd_times == [4.0, 8.0]

    def test_ramp_midpoint(self, g1):
        sched = PoseScheduler(g1, np.random.default_rng(0))
        sched.ramp_from = np.zeros(g1.n_upper)
        sched.target = type(sched.target)(
            ratios=np.zeros(g1.n_upper), angles=np.ones(g1.n_upper), hold_start=0.0
        )
        tick = sched.tick(25)  # t = 0.5 s into a 1 s ramp
        assert np.allclose(tick.upper_angles, 0.5)

    def test_continuity_across_boundaries(self, g1):
        sched = PoseScheduler(g1, np.random.default_rng(5))
        prev_angles = None
        max_step = 0.0
        boundary_jumps = []
        for k in range(0, 301):
            tick = sched.tick(k)
            if prev_angles is not None:
                step = np.abs(tick.upper_angles - prev_angles).max()
                if tick.pose_resampled:
                    boundary_jumps.append(step)
                else:
                    max_step = max(max_step, step)
            prev_angles = tick.upper_angles
        # At a resample tick the old ramp completes; the step onto it is an
        # ordinary ramp increment, never a jump to the new target.
        assert boundary_jumps and max(boundary_jumps) <= max_step + 1e-9

    def test_new_ramp_starts_at_emitted_value(self, g1):
        sched = PoseScheduler(g1, np.random.default_rng(6))
        for k in range(0, 50):
            sched.tick(k)
        tick = sched.tick(50)  # resample fires here
        assert tick.pose_resampled
        assert np.array_equal(sched.ramp_from, tick.upper_angles)

    def test_squat_fraction_binomial(self, g1):
        sched = PoseScheduler(g1, np.random.default_rng(11))
        n = 3000
        squats = sum(sched.sample_command()[1] for _ in range(n))
        p = 1.0 / 3.0
        sigma = math.sqrt(p * (1 - p) / n)
        assert abs(squats / n - p) <= 3 * sigma

    def test_squat_and_walk_modes(self, g1):
        sched = PoseScheduler(g1, np.random.default_rng(2))
        lo, hi = g1.height_command_range
        for _ in range(200):
            cmd, squat = sched.sample_command()
            if squat:
                assert cmd.vx == 0.0 and cmd.wyaw == 0.0
                assert lo <= cmd.height <= hi
            else:
                assert cmd.height == g1.height_target_walk
                assert g1.vx_range[0] <= cmd.vx <= g1.vx_range[1]
                assert g1.wyaw_range[0] <= cmd.wyaw <= g1.wyaw_range[1]

    def test_pose_targets_within_limits(self, g1):
        sched = PoseScheduler(g1, np.random.default_rng(9))
        lo = g1.pos_min[g1.upper_indices]
        hi = g1.pos_max[g1.upper_indices]
        for _ in range(100):
            pose = sched.sample_pose(0.0)
            assert np.all(pose.angles >= lo) and np.all(pose.angles <= hi)
            assert np.all((0.0 <= pose.ratios) & (pose.ratios <= 1.0))
