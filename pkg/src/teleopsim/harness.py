"""Batch experiment driver: vectorized rollouts, distribution checks, golden tables.

``eval_batch`` mirrors the evaluation protocol shape used for the trained
policies: N independent plants run for a fixed horizon with upper-body poses
resampled from the curriculum at a given difficulty and commands resampled on
the 4-second schedule, driven by the scripted height-servo controller. It
reports mean and standard deviation of five metrics: linear/angular velocity
tracking error, height tracking error, actor symmetry loss of the controller,
and living time.

Environments are stepped in lockstep as one vectorized batch; every
environment owns its RNG (seeds spawned per env index), so results are
independent of chunking, and aggregation uses exactly-rounded sums
(math.fsum), making it order-independent. With ``workers > 1`` the batch is
chunked across processes.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .controller import height_servo_targets
from .curriculum import COMMAND_INTERVAL, POSE_INTERVAL, SQUAT_FRACTION, sample_spread, spread_cdf
from .errors import ConfigError
from .mirror import MirrorSpec, mirror_action, mirror_flat_stack
from .observation import FrameLayout
from .plant import ActionCommand, PlantConfig, initial_state, push_due, step_state, termination_mask
from .randomize import RandomizationConfig
from .records import (
    METRIC_ANG_VEL,
    METRIC_COLUMNS,
    METRIC_HEIGHT,
    METRIC_LIN_VEL,
    METRIC_LIVING,
    METRIC_SYMMETRY,
)
from .rewards import load_reward
from .robot import RobotDescription, load_robot


def ks_statistic(samples: np.ndarray, cdf) -> float:
    """Two-sided Kolmogorov-Smirnov statistic of samples against an analytic CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n == 0:
        raise ConfigError("KS statistic over an empty sample")
    f = np.asarray(cdf(x), dtype=float)
    d_plus = np.max(np.arange(1, n + 1) / n - f)
    d_minus = np.max(f - np.arange(0, n) / n)
    return float(max(d_plus, d_minus))


def dist_check(ratios: list[float], n_samples: int = 1_000_000, seed: int = 0) -> list[dict]:
    """Per-difficulty KS report of the pose-spread sampler vs its analytic CDF.

    Also reports each sample set against the uniform CDF, which is the
    difficulty -> 1 limit.
    """
    if n_samples < 10_000:
        raise ConfigError("distribution check needs at least 1e4 samples")
    out = []
    for i, rho in enumerate(ratios):
        rng = np.random.default_rng(np.random.SeedSequence((seed, i)))
        draws = sample_spread(rho, rng.random(n_samples))
        out.append(
            {
                "upper_ratio": rho,
                "samples": n_samples,
                "ks": ks_statistic(draws, lambda x: spread_cdf(rho, x)),
                "ks_vs_uniform": ks_statistic(draws, lambda x: np.clip(x, 0.0, 1.0)),
            }
        )
    return out


# ---------------------------------------------------------------------------------------
# Vectorized evaluation rollout
# ---------------------------------------------------------------------------------------


@dataclass
class _VectorCommand:
    """Per-environment command arrays, duck-typed into step_state."""

    vx: np.ndarray
    wyaw: np.ndarray
    height: np.ndarray


class _VectorSchedule:
    """Lockstep pose/command schedule over a batch; one RNG per environment."""

    def __init__(
        self,
        desc: RobotDescription,
        rngs: list[np.random.Generator],
        upper_ratio: float,
        control_hz: float,
    ):
        self.desc = desc
        self.rngs = rngs
        self.upper_ratio = upper_ratio
        self.control_hz = control_hz
        self.pose_every = round(POSE_INTERVAL * control_hz)
        self.cmd_every = round(COMMAND_INTERVAL * control_hz)

        b = len(rngs)
        upper = desc.upper_indices
        self._defaults = desc.default_pos[upper]
        self._lo = desc.pos_min[upper]
        self._hi = desc.pos_max[upper]
        self._amplitude = np.maximum(self._hi - self._defaults, self._defaults - self._lo)

        self.emitted = np.tile(self._defaults, (b, 1))
        self.ramp_from = self.emitted.copy()
        self.target = self.emitted.copy()
        self.hold_start = np.zeros(b)
        self.cmd = _VectorCommand(
            vx=np.zeros(b), wyaw=np.zeros(b), height=np.full(b, desc.height_target_walk)
        )
        self.squat = np.zeros(b, dtype=bool)

    def _resample_pose(self, i: int, t: float) -> None:
        rng = self.rngs[i]
        spread = sample_spread(self.upper_ratio, rng.random())
        ratios = rng.random(len(self._defaults)) * spread
        direction = rng.choice([-1.0, 1.0], size=len(self._defaults))
        self.target[i] = np.clip(
            self._defaults + direction * ratios * self._amplitude, self._lo, self._hi
        )
        self.hold_start[i] = t

    def _resample_cmd(self, i: int) -> None:
        rng = self.rngs[i]
        desc = self.desc
        if rng.random() < SQUAT_FRACTION:
            self.squat[i] = True
            self.cmd.vx[i] = 0.0
            self.cmd.wyaw[i] = 0.0
            self.cmd.height[i] = rng.uniform(*desc.height_command_range)
        else:
            self.squat[i] = False
            self.cmd.vx[i] = rng.uniform(*desc.vx_range)
            self.cmd.wyaw[i] = rng.uniform(*desc.wyaw_range)
            self.cmd.height[i] = desc.height_target_walk

    def tick(self, k: int) -> tuple[np.ndarray, _VectorCommand]:
        t = k / self.control_hz
        frac = np.clip((t - self.hold_start) / POSE_INTERVAL, 0.0, 1.0)[:, None]
        self.emitted = self.ramp_from + frac * (self.target - self.ramp_from)
        if k > 0 and k % self.pose_every == 0:
            self.ramp_from = self.emitted.copy()
            for i in range(len(self.rngs)):
                self._resample_pose(i, t)
        if k > 0 and k % self.cmd_every == 0:
            for i in range(len(self.rngs)):
                self._resample_cmd(i)
        return self.emitted, self.cmd


def _run_env_chunk(
    desc: RobotDescription,
    plant_cfg: PlantConfig,
    seed_entropies: list,
    seconds: float,
    upper_ratio: float,
) -> dict[str, np.ndarray]:
    rngs = [np.random.default_rng(np.random.SeedSequence(e)) for e in seed_entropies]
    b = len(rngs)
    hz = plant_cfg.control_hz
    n_ticks = round(seconds * hz)
    probe_tick = min(n_ticks - 1, round(5.0 * hz))

    state = initial_state(desc, plant_cfg, (b,))
    schedule = _VectorSchedule(desc, rngs, upper_ratio, hz)
    spec = MirrorSpec.for_robot(desc)
    layout = FrameLayout.for_robot(desc)

    alive = np.ones(b, dtype=bool)
    living = np.full(b, seconds)
    err_xy = np.zeros(b)
    err_ang = np.zeros(b)
    err_h = np.zeros(b)
    ticks_alive = np.zeros(b)
    sym_loss = np.zeros(b)

    stack = None  # (b, 6, frame_len), oldest first
    for k in range(n_ticks):
        upper, cmd = schedule.tick(k)
        lower = height_servo_targets(desc, cmd.height)
        push = None
        if push_due((k + 1) / hz, plant_cfg):
            lo, hi = plant_cfg.push_vel_range
            push = np.stack([rng.uniform(lo, hi, 2) for rng in rngs])
        state = step_state(desc, plant_cfg, state, ActionCommand(lower, upper), cmd, push_dv=push)

        frame = np.concatenate(
            [
                cmd.vx[:, None],
                cmd.wyaw[:, None],
                cmd.height[:, None],
                state.omega_body,
                state.gravity_proj,
                state.q,
                state.qd,
                state.last_action,
            ],
            axis=-1,
        )
        if stack is None:
            stack = np.repeat(frame[:, None, :], 6, axis=1)
        else:
            stack[:, :-1] = stack[:, 1:]
            stack[:, -1] = frame

        err_xy += alive * np.hypot(state.base_vel[:, 0] - cmd.vx, state.base_vel[:, 1])
        err_ang += alive * np.abs(state.base_yaw_rate - cmd.wyaw)
        err_h += alive * np.abs(np.asarray(state.base_height) - cmd.height)
        ticks_alive += alive

        if k == probe_tick:
            sym_loss = _servo_symmetry_loss(desc, spec, layout, stack)

        dead = termination_mask(state, plant_cfg)
        newly = alive & dead
        living[newly] = k / hz
        alive &= ~dead

    n = np.maximum(ticks_alive, 1.0)
    return {
        METRIC_LIN_VEL: err_xy / n,
        METRIC_ANG_VEL: err_ang / n,
        METRIC_HEIGHT: err_h / n,
        METRIC_SYMMETRY: sym_loss,
        METRIC_LIVING: living,
    }


def _servo_symmetry_loss(
    desc: RobotDescription, spec: MirrorSpec, layout: FrameLayout, stack: np.ndarray
) -> np.ndarray:
    """Actor symmetry loss of the height servo probed at the current stacks."""
    b = stack.shape[0]
    flat = stack.reshape(b, -1)
    mirrored = mirror_flat_stack(flat, spec)
    height_slot = 5 * layout.length + 2  # newest frame's command height

    def policy(x: np.ndarray) -> np.ndarray:
        return height_servo_targets(desc, x[:, height_slot])

    a = policy(flat)
    a_m = policy(mirrored)
    return np.mean((mirror_action(a, spec) - a_m) ** 2, axis=-1)


@dataclass
class EvalResult:
    """Mean/sd per metric column plus the raw per-environment values."""

    columns: dict[str, tuple[float, float]]
    per_env: dict[str, np.ndarray]
    n_envs: int
    seconds: float
    seed: int
    robot: str

    def table(self) -> str:
        width = max(len(c) for c in METRIC_COLUMNS)
        lines = [f"{'Metric':<{width}}  {'mean':>12}  {'sd':>12}"]
        for c in METRIC_COLUMNS:
            mean, sd = self.columns[c]
            lines.append(f"{c:<{width}}  {mean:>12.6f}  {sd:>12.6f}")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(
            {
                "robot": self.robot,
                "n_envs": self.n_envs,
                "seconds": self.seconds,
                "seed": self.seed,
                "metrics": {c: {"mean": m, "sd": s} for c, (m, s) in self.columns.items()},
            },
            indent=2,
        )


def eval_batch(
    robot: str = "g1",
    n_envs: int = 1000,
    seconds: float = 20.0,
    seed: int = 0,
    upper_ratio: float = 1.0,
    workers: int = 1,
    plant_cfg: PlantConfig | None = None,
) -> EvalResult:
    """Run ``n_envs`` independent scripted rollouts and aggregate the five metrics."""
    if n_envs < 1:
        raise ConfigError("n_envs must be >= 1")
    desc = load_robot(robot)
    cfg = plant_cfg or PlantConfig(pd_reference="current")
    entropies = [(seed, i) for i in range(n_envs)]

    if workers <= 1 or n_envs < 2 * workers:
        chunks = [_run_env_chunk(desc, cfg, entropies, seconds, upper_ratio)]
    else:
        bounds = np.linspace(0, n_envs, workers + 1, dtype=int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_env_chunk, desc, cfg, entropies[a:b], seconds, upper_ratio)
                for a, b in zip(bounds[:-1], bounds[1:])
                if b > a
            ]
            chunks = [f.result() for f in futures]

    per_env = {c: np.concatenate([ch[c] for ch in chunks]) for c in METRIC_COLUMNS}
    columns = {}
    for c in METRIC_COLUMNS:
        vals = per_env[c]
        mean = math.fsum(vals) / len(vals)
        var = math.fsum((v - mean) ** 2 for v in vals) / len(vals)
        columns[c] = (mean, math.sqrt(var))
    return EvalResult(
        columns=columns, per_env=per_env, n_envs=n_envs, seconds=seconds, seed=seed, robot=desc.name
    )


# ---------------------------------------------------------------------------------------
# Golden-table verification
# ---------------------------------------------------------------------------------------


@dataclass
class GoldenCheck:
    table: str
    subject: str
    key: str
    expected: str
    actual: str
    ok: bool


def _load_golden(name: str) -> dict:
    try:
        text = resources.files("teleopsim.golden").joinpath(name).read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise ConfigError(f"missing golden file {name}") from e
    return json.loads(text)


def _check(table: str, subject: str, key: str, expected, actual: float) -> GoldenCheck:
    ok = float(expected) == float(actual)
    return GoldenCheck(table, subject, key, str(expected), repr(float(actual)), ok)


def _check_range(table: str, subject: str, key: str, expected: list, actual) -> list[GoldenCheck]:
    return [
        _check(table, subject, f"{key}[0]", expected[0], actual[0]),
        _check(table, subject, f"{key}[1]", expected[1], actual[1]),
    ]


def golden_verify() -> list[GoldenCheck]:
    """Compare built-in presets against the checked-in golden tables."""
    out: list[GoldenCheck] = []

    key_params = _load_golden("key_params.json")
    for name, g in key_params.items():
        desc = load_robot(name)
        rw = load_reward(name)
        plant = PlantConfig()
        out.append(_check("key_params", name, "height_target_walk", g["height_target_walk"], desc.height_target_walk))
        out += _check_range("key_params", name, "vx_range", g["vx_range"], desc.vx_range)
        out += _check_range("key_params", name, "vy_range", g["vy_range"], desc.vy_range)
        out += _check_range("key_params", name, "wyaw_range", g["wyaw_range"], desc.wyaw_range)
        out += _check_range("key_params", name, "squat_height_range", g["squat_height_range"], desc.squat_height_range)
        out.append(_check("key_params", name, "soft_dof_pos_limit", g["soft_dof_pos_limit"], rw.soft_dof_pos_limit))
        out.append(_check("key_params", name, "soft_dof_vel_limit", g["soft_dof_vel_limit"], rw.soft_dof_vel_limit))
        out.append(_check("key_params", name, "soft_torque_limit", g["soft_torque_limit"], rw.soft_torque_limit))
        out.append(_check("key_params", name, "max_contact_force", g["max_contact_force"], rw.max_contact_force))
        out.append(_check("key_params", name, "least_feet_distance", g["least_feet_distance"], rw.least_feet_distance))
        out.append(_check("key_params", name, "least_knee_distance", g["least_knee_distance"], rw.least_knee_distance))
        out.append(_check("key_params", name, "most_feet_distance", g["most_feet_distance"], rw.most_feet_distance))
        out.append(_check("key_params", name, "most_knee_distance", g["most_knee_distance"], rw.most_knee_distance))
        out.append(
            _check("key_params", name, "clearance_height_target", g["clearance_height_target"], rw.clearance_height_target)
        )
        out.append(_check("key_params", name, "push_interval", g["push_interval"], plant.push_interval))
        out.append(_check("key_params", name, "pose_resample_interval", g["pose_resample_interval"], POSE_INTERVAL))
        out.append(
            _check("key_params", name, "command_resample_interval", g["command_resample_interval"], COMMAND_INTERVAL)
        )

    weights = _load_golden("reward_weights.json")
    for name, table in weights.items():
        rw = load_reward(name)
        for term, expected in table.items():
            if term not in rw.weights:
                out.append(GoldenCheck("reward_weights", name, term, str(expected), "<missing>", False))
            else:
                out.append(_check("reward_weights", name, term, expected, rw.weights[term]))
        for term in rw.weights:
            if term not in table:
                out.append(GoldenCheck("reward_weights", name, term, "<absent>", repr(rw.weights[term]), False))

    ranges = _load_golden("randomization_ranges.json")
    rand = RandomizationConfig()
    for key, expected in ranges.items():
        out += _check_range("randomization_ranges", "default", key, expected, getattr(rand, key))

    return out
