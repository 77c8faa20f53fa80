"""Command-line interface.

Subcommands:

* ``gateway``        live browser gateway (WebSocket + static cockpit UI)
* ``rollout``        scripted session -> record file + metrics
* ``replay``         re-execute a record file and compare digests
* ``eval-batch``     vectorized batch evaluation (five-metric table)
* ``dist-check``     KS report of the curriculum sampler vs its analytic CDF
* ``reward-dump``    per-tick reward-term CSV from a scripted session
* ``golden-verify``  compare built-in presets against the golden tables
* ``packet-inspect`` decode and pretty-print a hex-encoded frame

Set ``TELEOPSIM_LOG`` (debug/info/warning/error) to control log verbosity.
All outputs are deterministic under ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import protocol
from .config import RunConfig, load_run_config
from .errors import TeleopsimError
from .gateway import ScriptedSource, Session, SessionConfig, replay as replay_records
from .harness import dist_check, eval_batch, golden_verify
from .records import METRIC_COLUMNS, metrics as episode_metrics, read_records
from .rewards import TERM_NAMES
from .transport import TransportConfig


def _setup_logging() -> None:
    level = os.environ.get("TELEOPSIM_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(name)s: %(message)s")


def _load_script(path: str | None) -> list[dict]:
    if path is None:
        return [{"t": 0.0}]
    with open(path, "r", encoding="utf-8") as f:
        doc = yaml.safe_load(f)
    if not isinstance(doc, list):
        raise TeleopsimError(f"{path}: script must be a list of keyframes")
    return doc


def _run_config(args: argparse.Namespace) -> RunConfig:
    """Run-config file merged with explicit CLI flag overrides."""
    run = load_run_config(args.config) if getattr(args, "config", None) else RunConfig()
    if args.robot is not None:
        run.robot = args.robot
    if args.seed is not None:
        run.seed = args.seed
    transport = {
        "latency_mean": run.transport.latency_mean,
        "jitter_sd": run.transport.jitter_sd,
        "drop_prob": run.transport.drop_prob,
    }
    if args.latency_ms is not None:
        transport["latency_mean"] = args.latency_ms / 1000.0
    if args.jitter_ms is not None:
        transport["jitter_sd"] = args.jitter_ms / 1000.0
    if args.drop is not None:
        transport["drop_prob"] = args.drop
    run.transport = TransportConfig(**transport)
    if args.randomize:
        run.randomize = True
    return run


def _session_config(args: argparse.Namespace) -> SessionConfig:
    run = _run_config(args)
    args.robot = run.robot  # resolved value for downstream helpers
    return SessionConfig(
        robot=run.robot,
        reward=run.reward,
        seed=run.seed,
        command_hz=run.command_hz,
        heartbeat_timeout=run.heartbeat_timeout,
        failsafe_decay=run.failsafe_decay,
        plant=run.plant,
        transport=run.transport,
        randomize=run.randomize,
        randomization=run.randomization,
        record_terms=getattr(args, "terms", False),
    )


def _add_session_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="run-config YAML (flags override file values)")
    p.add_argument("--robot", default=None, help="preset name or robot description file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--latency-ms", type=float, default=None)
    p.add_argument("--jitter-ms", type=float, default=None)
    p.add_argument("--drop", type=float, default=None)
    p.add_argument("--randomize", action="store_true", help="apply domain randomization at reset")


def _cmd_rollout(args: argparse.Namespace) -> int:
    cfg = _session_config(args)
    session = Session(cfg, ScriptedSource(_load_script(args.script), load_desc(args.robot), cfg.command_hz))
    session.run(args.seconds)
    if args.record:
        session.save(args.record)
    m = episode_metrics(session.records, episode_cap=args.seconds)
    if args.metrics:
        Path(args.metrics).write_text(json.dumps(m, indent=2))
    for k, v in m.items():
        print(f"{k}: {v:.6f}")
    return 0


def load_desc(source):
    from .robot import load_robot

    return load_robot(source)


def _cmd_replay(args: argparse.Namespace) -> int:
    header, records = read_records(args.file)
    from .records import digest_records

    stored = digest_records(records)
    replayed = replay_records(args.file, seed=args.seed)
    print(f"stored digest:   {stored}")
    print(f"replayed digest: {replayed}")
    ok = stored == replayed
    print("MATCH" if ok else "MISMATCH")
    return 0 if ok else 1


def _cmd_eval_batch(args: argparse.Namespace) -> int:
    run = load_run_config(args.config) if args.config else RunConfig()
    res = eval_batch(
        robot=args.robot if args.robot is not None else run.robot,
        n_envs=args.n_envs,
        seconds=args.seconds,
        seed=args.seed if args.seed is not None else run.seed,
        upper_ratio=args.upper_ratio if args.upper_ratio is not None else run.curriculum.upper_ratio,
        workers=args.workers,
        plant_cfg=run.plant,
    )
    print(res.table())
    if args.json:
        Path(args.json).write_text(res.to_json())
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["metric", "mean", "sd"])
            for c in METRIC_COLUMNS:
                mean, sd = res.columns[c]
                w.writerow([c, repr(mean), repr(sd)])
    return 0


def _cmd_dist_check(args: argparse.Namespace) -> int:
    ratios = [float(r) for r in args.ratios.split(",")]
    report = dist_check(ratios, n_samples=args.samples, seed=args.seed)
    text = json.dumps(report, indent=2)
    print(text)
    if args.json:
        Path(args.json).write_text(text)
    worst = max(r["ks"] for r in report)
    return 0 if worst < args.threshold else 1


def _cmd_reward_dump(args: argparse.Namespace) -> int:
    args.terms = True
    cfg = _session_config(args)
    session = Session(cfg, ScriptedSource(_load_script(args.script), load_desc(args.robot), cfg.command_hz))
    session.run(args.seconds)
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["k", "t", "total", *TERM_NAMES])
        for r in session.records:
            w.writerow([r.k, repr(r.t), repr(r.reward_total), *[repr(r.reward_terms[n]) for n in TERM_NAMES]])
    print(f"wrote {len(session.records)} ticks to {args.out}")
    return 0


def _cmd_golden_verify(args: argparse.Namespace) -> int:
    checks = golden_verify()
    failures = [c for c in checks if not c.ok]
    by_table: dict[str, list] = {}
    for c in checks:
        by_table.setdefault(c.table, []).append(c)
    for table, items in by_table.items():
        bad = [c for c in items if not c.ok]
        status = "PASS" if not bad else f"FAIL ({len(bad)}/{len(items)})"
        print(f"{table}: {status}")
    for c in failures:
        print(f"  FAIL {c.table} {c.subject}.{c.key}: expected {c.expected}, got {c.actual}")
    return 0 if not failures else 1


def _cmd_packet_inspect(args: argparse.Namespace) -> int:
    text = Path(args.file).read_text()
    buf = bytes.fromhex("".join(text.split()))
    try:
        pkt = protocol.decode(buf)
    except TeleopsimError as e:
        print(f"decode failed: {type(e).__name__}: {e}")
        return 1
    names = {protocol.TYPE_COMMAND: "command", protocol.TYPE_STATE: "state", protocol.TYPE_HEARTBEAT: "heartbeat"}
    print(f"version: {pkt.version}")
    print(f"type:    {names.get(pkt.ptype, pkt.ptype)}")
    print(f"seq:     {pkt.seq}")
    print(f"payload: {pkt.payload.size} floats ({pkt.payload.size * 4} bytes)")
    if pkt.ptype == protocol.TYPE_COMMAND and pkt.version == protocol.VERSION_FIXED:
        print(f"  vx={pkt.vx:.6g} wyaw={pkt.wyaw:.6g} height={pkt.height:.6g}")
        print(f"  arm:  {np.round(pkt.arm_targets, 4).tolist()}")
        print(f"  hand: {np.round(pkt.hand_targets, 4).tolist()}")
    elif pkt.payload.size:
        print(f"  data: {np.round(pkt.payload.astype(float), 4).tolist()}")
    return 0


def _cmd_gateway(args: argparse.Namespace) -> int:
    from .server import serve

    host, _, port = args.listen.partition(":")
    serve(
        _session_config(args),
        host=host or "127.0.0.1",
        port=int(port or 8330),
        record_path=args.record,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teleopsim", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gateway", help="serve the live browser gateway")
    _add_session_args(p)
    p.add_argument("--listen", default="127.0.0.1:8330")
    p.add_argument("--record", default=None, help="episode record output path")
    p.set_defaults(fn=_cmd_gateway)

    p = sub.add_parser("rollout", help="run a scripted session")
    _add_session_args(p)
    p.add_argument("--script", default=None, help="YAML/JSON keyframe list")
    p.add_argument("--seconds", type=float, default=20.0)
    p.add_argument("--record", default=None)
    p.add_argument("--metrics", default=None, help="metrics JSON output path")
    p.set_defaults(fn=_cmd_rollout)

    p = sub.add_parser("replay", help="re-execute a record file")
    p.add_argument("file")
    p.add_argument("--seed", type=int, default=None, help="override the recorded seed")
    p.set_defaults(fn=_cmd_replay)

    p = sub.add_parser("eval-batch", help="vectorized batch evaluation")
    p.add_argument("--config", default=None, help="run-config YAML (flags override file values)")
    p.add_argument("--robot", default=None)
    p.add_argument("--n-envs", type=int, default=1000)
    p.add_argument("--seconds", type=float, default=20.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--upper-ratio", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(fn=_cmd_eval_batch)

    p = sub.add_parser("dist-check", help="curriculum sampler distribution check")
    p.add_argument("--ratios", default="0,0.25,0.5,0.75,0.9")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=0.005)
    p.add_argument("--json", default=None)
    p.set_defaults(fn=_cmd_dist_check)

    p = sub.add_parser("reward-dump", help="per-tick reward term CSV")
    _add_session_args(p)
    p.add_argument("--script", default=None)
    p.add_argument("--seconds", type=float, default=5.0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_reward_dump)

    p = sub.add_parser("golden-verify", help="verify presets against golden tables")
    p.set_defaults(fn=_cmd_golden_verify)

    p = sub.add_parser("packet-inspect", help="decode a hex-encoded frame")
    p.add_argument("file")
    p.set_defaults(fn=_cmd_packet_inspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except TeleopsimError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
