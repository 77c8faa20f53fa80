"""Run configuration file: one YAML document for a whole session or batch.

Schema ``run-config/1``. All sections are optional; omitted keys use the
same defaults as the CLI flags. Flags override file values.

.. code-block:: yaml

    schema: run-config/1
    robot: g1                 # preset name or robot description file
    reward: g1                # preset name or reward config file
    seed: 3
    session:
      command_hz: 10.0
      heartbeat_timeout: 0.5
      failsafe_decay: 0.5
    plant:
      pd_reference: current   # "default" reproduces the published open-loop form
      push_interval: 4.0
    transport:
      latency_ms: 16.0
      jitter_ms: 0.0
      drop: 0.0
    curriculum:
      upper_ratio: 1.0
      step_increment: 0.05
      promotion_threshold: 0.8
    randomization:
      enabled: true
      kp_scale: [0.90, 1.10]  # any row of the randomization table
      obs_noise_mode: iid
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .curriculum import CurriculumState
from .errors import ConfigError
from .plant import PlantConfig
from .randomize import RandomizationConfig
from .transport import TransportConfig

SCHEMA = "run-config/1"


@dataclass
class RunConfig:
    robot: str = "g1"
    reward: str | None = None
    seed: int = 0
    command_hz: float = 10.0
    heartbeat_timeout: float = 0.5
    failsafe_decay: float = 0.5
    plant: PlantConfig = field(default_factory=lambda: PlantConfig(pd_reference="current"))
    transport: TransportConfig = field(default_factory=TransportConfig)
    curriculum: CurriculumState = field(default_factory=lambda: CurriculumState(upper_ratio=1.0))
    randomize: bool = False
    randomization: RandomizationConfig = field(default_factory=RandomizationConfig)


def _build(cls, doc: dict, what: str):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown {what} keys: {sorted(unknown)}")
    return cls(**doc)


def parse_run_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise ConfigError(f"unsupported run config schema: {doc.get('schema')!r}")
    out = RunConfig()
    out.robot = str(doc.get("robot", out.robot))
    out.reward = doc.get("reward", out.reward)
    out.seed = int(doc.get("seed", out.seed))

    session = dict(doc.get("session", {}))
    unknown = set(session) - {"command_hz", "heartbeat_timeout", "failsafe_decay"}
    if unknown:
        raise ConfigError(f"unknown session keys: {sorted(unknown)}")
    out.command_hz = float(session.get("command_hz", out.command_hz))
    out.heartbeat_timeout = float(session.get("heartbeat_timeout", out.heartbeat_timeout))
    out.failsafe_decay = float(session.get("failsafe_decay", out.failsafe_decay))

    plant = dict(doc.get("plant", {}))
    if "push_vel_range" in plant:
        plant["push_vel_range"] = tuple(float(v) for v in plant["push_vel_range"])
    out.plant = _build(PlantConfig, {**dataclasses.asdict(out.plant), **plant}, "plant")

    transport = dict(doc.get("transport", {}))
    unknown = set(transport) - {"latency_ms", "jitter_ms", "drop"}
    if unknown:
        raise ConfigError(f"unknown transport keys: {sorted(unknown)}")
    out.transport = TransportConfig(
        latency_mean=float(transport.get("latency_ms", out.transport.latency_mean * 1000.0)) / 1000.0,
        jitter_sd=float(transport.get("jitter_ms", out.transport.jitter_sd * 1000.0)) / 1000.0,
        drop_prob=float(transport.get("drop", out.transport.drop_prob)),
    )

    curriculum = dict(doc.get("curriculum", {}))
    out.curriculum = _build(CurriculumState, {**dataclasses.asdict(out.curriculum), **curriculum}, "curriculum")

    rand = dict(doc.get("randomization", {}))
    out.randomize = bool(rand.pop("enabled", out.randomize))
    if rand:
        out.randomization = RandomizationConfig.from_dict(rand)
    return out


def load_run_config(path: str | Path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as f:
        doc = yaml.safe_load(f)
    return parse_run_config(doc)
