"""Episode records: line-delimited tick log, metrics, digests and replay.

File format (see RECORDS.md): one JSON object per line.

* line 1: header with ``schema`` = ``teleopsim-episode/1`` plus everything
  needed to re-execute the episode (robot, seed, plant config, reward
  preset, whether randomization was enabled);
* one line per control tick (monotone ``k``);
* final line: ``{"end": true, "ticks": N, "digest": "..."}``.

A truncated file (missing end marker, cut line, tick-count mismatch) raises
TruncationError; an unknown schema raises VersionError. Floats are written
with ``repr`` round-trip fidelity, so a replayed episode reproduces the
digest bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import EmptyEpisode, TruncationError, VersionError

SCHEMA = "teleopsim-episode/1"

METRIC_LIN_VEL = "Lin. Vel Error (m/s)"
METRIC_ANG_VEL = "Ang. Vel Error (rad/s)"
METRIC_HEIGHT = "Height Error (m)"
METRIC_SYMMETRY = "symmetry loss (-)"
METRIC_LIVING = "Living Time (s)"
METRIC_COLUMNS = (METRIC_LIN_VEL, METRIC_ANG_VEL, METRIC_HEIGHT, METRIC_SYMMETRY, METRIC_LIVING)


@dataclass
class TickRecord:
    """One control tick: the inputs that drove the plant plus a state summary."""

    k: int
    t: float
    cmd_vx: float
    cmd_wyaw: float
    cmd_height: float
    upper_targets: list[float]
    lower_targets: list[float]
    base_height: float
    base_vel: list[float]
    base_yaw_rate: float
    tilt: list[float]
    foot_contact: list[bool]
    reward_total: float
    terminated: bool = False
    reason: str | None = None
    reward_terms: dict[str, float] | None = None

    def to_json(self) -> str:
        d = asdict(self)
        if d["reward_terms"] is None:
            del d["reward_terms"]
        if d["reason"] is None:
            del d["reason"]
        return json.dumps(d, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "TickRecord":
        return cls(**d)


def digest_records(records: Iterable[TickRecord]) -> str:
    """Order-sensitive digest of the state stream (bit-exact float identity)."""
    h = hashlib.sha256()
    for r in records:
        line = ",".join(
            [
                str(r.k),
                repr(r.t),
                repr(r.cmd_vx),
                repr(r.cmd_wyaw),
                repr(r.cmd_height),
                repr(r.base_height),
                ",".join(repr(v) for v in r.base_vel),
                repr(r.base_yaw_rate),
                ",".join(repr(v) for v in r.tilt),
                ",".join("1" if c else "0" for c in r.foot_contact),
                repr(r.reward_total),
            ]
        )
        h.update(line.encode())
        h.update(b"\n")
    return h.hexdigest()


def write_records(path: str | Path, header: dict, records: list[TickRecord]) -> None:
    header = dict(header)
    header["schema"] = SCHEMA
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(header, separators=(",", ":")) + "\n")
        for r in records:
            f.write(r.to_json() + "\n")
        end = {"end": True, "ticks": len(records), "digest": digest_records(records)}
        f.write(json.dumps(end, separators=(",", ":")) + "\n")


def read_records(path: str | Path) -> tuple[dict, list[TickRecord]]:
    """Load and fully verify a record file (schema, end marker, tick count)."""
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise TruncationError(f"{path}: empty file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise TruncationError(f"{path}: unreadable header: {e}") from e
    if not isinstance(header, dict) or header.get("schema") != SCHEMA:
        raise VersionError(f"{path}: unsupported schema {header.get('schema')!r}")

    records: list[TickRecord] = []
    end = None
    for i, line in enumerate(lines[1:], start=2):
        try:
            d = json.loads(line)
        except json.JSONDecodeError as e:
            raise TruncationError(f"{path}: cut line {i}: {e}") from e
        if d.get("end"):
            end = d
            break
        records.append(TickRecord.from_dict(d))
    if end is None:
        raise TruncationError(f"{path}: no end marker")
    if end.get("ticks") != len(records):
        raise TruncationError(f"{path}: end marker says {end.get('ticks')} ticks, file has {len(records)}")
    if end.get("digest") != digest_records(records):
        raise TruncationError(f"{path}: stored digest does not match records")
    return header, records


def metrics(
    records: list[TickRecord],
    episode_cap: float | None = None,
    symmetry_loss: float | None = None,
) -> dict[str, float]:
    """Tracking-error metrics over one episode's records.

    Living time is the final record's time for terminated episodes and the
    episode cap (when given) otherwise. The linear-velocity error combines
    the forward error and the lateral drift (commanded lateral velocity is
    zero) as a planar Euclidean error; per-axis means are also reported.
    """
    if not records:
        raise EmptyEpisode("metrics over an empty record list")
    n = len(records)
    err_x = sum(abs(r.base_vel[0] - r.cmd_vx) for r in records) / n
    err_y = sum(abs(r.base_vel[1]) for r in records) / n
    err_xy = sum(((r.base_vel[0] - r.cmd_vx) ** 2 + r.base_vel[1] ** 2) ** 0.5 for r in records) / n
    err_ang = sum(abs(r.base_yaw_rate - r.cmd_wyaw) for r in records) / n
    err_h = sum(abs(r.base_height - r.cmd_height) for r in records) / n
    terminated = records[-1].terminated
    living = records[-1].t if (terminated or episode_cap is None) else float(episode_cap)
    out = {
        METRIC_LIN_VEL: err_xy,
        "lin_vel_err_x": err_x,
        "lin_vel_err_y": err_y,
        METRIC_ANG_VEL: err_ang,
        METRIC_HEIGHT: err_h,
        METRIC_LIVING: living,
    }
    if symmetry_loss is not None:
        out[METRIC_SYMMETRY] = float(symmetry_loss)
    return out
