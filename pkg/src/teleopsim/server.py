"""Live browser gateway: WebSocket bridge plus static cockpit hosting.

The browser speaks a text mirror of the binary packet protocol: command
messages carry the same logical fields as a version-1 command frame
(sequence number, vx/wyaw/height, 14 arm and 14 hand targets) as JSON, and
the server streams state snapshots at 30 Hz. Message shapes are documented
in PROTOCOL.md. The binary framing remains the internal contract; the text
mirror exists so a browser can join without a binary codec.

Latency injection: commands are applied (and echoed back for round-trip
measurement) ``latency`` seconds after receipt, modelling the cockpit-robot
link. The control loop runs at the plant's control rate on the wall clock
with logical tick times k / control_hz.

Recording: toggling the record flag resets the plant to a fresh episode
(seed recorded in the header) so the resulting file is replayable with the
standard replay machinery; toggling off (or disconnecting) writes the file.
"""

from __future__ import annotations

import asyncio
import json
import logging
import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles

from .controller import height_servo_targets
from .gateway import SessionConfig, map_upper_targets
from .observation import Command, clamp_command
from .plant import ActionCommand, Plant
from .randomize import episode_gains, sample_episode
from .records import TickRecord, write_records
from .rewards import RewardEngine, load_reward
from .robot import load_robot

logger = logging.getLogger(__name__)

SNAPSHOT_HZ = 30.0

FALLBACK_PAGE = """<!doctype html>
<html><body><h1>teleopsim gateway</h1>
<p>No cockpit UI build found. Build the frontend (see frontend/README.md) or
connect a client to the WebSocket endpoint at <code>/ws</code>.</p>
</body></html>"""


class LiveGateway:
    """One live plant instance shared by the control loop and WS handlers."""

    def __init__(self, cfg: SessionConfig, record_path: str | None = None):
        self.cfg = cfg
        self.desc = load_robot(cfg.robot)
        self.reward_cfg = load_reward(cfg.reward or self.desc.name)
        self.record_path = record_path
        self.clients: set[WebSocket] = set()
        self.episode_seed = cfg.seed
        self._reset_episode()

        self._latest_cmd: Command | None = None
        self._last_rx_t = -np.inf
        self._seq_ack = -1
        upper_defaults = self.desc.default_pos[self.desc.upper_indices]
        self._upper_emitted = upper_defaults.copy()
        self._upper_ramp_from = upper_defaults.copy()
        self._upper_target = upper_defaults.copy()
        self._upper_ramp_t0 = -np.inf

        self.recording = False
        self.records: list[TickRecord] = []
        self.last_write: str | None = None
        self.terminated = False
        self.reason: str | None = None
        self._stop = asyncio.Event()

    # -- episode management ---------------------------------------------------------

    def _reset_episode(self) -> None:
        ss = np.random.SeedSequence(self.episode_seed)
        ss_rand, ss_plant, _ = ss.spawn(3)
        gains = None
        init_q = None
        if self.cfg.randomize:
            rand = sample_episode(self.desc, self.cfg.randomization, np.random.default_rng(ss_rand))
            gains = episode_gains(self.desc, self.cfg.plant, rand)
            init_q = rand.init_q
        self.plant = Plant(self.desc, self.cfg.plant, seed=ss_plant, gains=gains, init_q=init_q)
        self.engine = RewardEngine(self.desc, self.reward_cfg, pd_reference=self.cfg.plant.pd_reference)
        act0 = ActionCommand(
            lower_targets=self.desc.default_pos[self.desc.lower_indices].copy(),
            upper_targets=self.desc.default_pos[self.desc.upper_indices].copy(),
        )
        self._prev_states = [self.plant.state.copy(), self.plant.state.copy()]
        self._prev_actions = [act0, act0]
        self.k = 0
        self.reward_total = 0.0
        self.terminated = False
        self.reason = None

    def start_recording(self) -> None:
        self.episode_seed += 1
        self._reset_episode()
        self.records = []
        self.recording = True

    def stop_recording(self) -> str | None:
        self.recording = False
        if not self.records or not self.record_path:
            return None
        header = {
            "robot": self.cfg.robot,
            "reward": self.reward_cfg.name,
            "seed": self.episode_seed,
            "command_hz": self.cfg.command_hz,
            "heartbeat_timeout": self.cfg.heartbeat_timeout,
            "failsafe_decay": self.cfg.failsafe_decay,
            "plant": _asdict(self.cfg.plant),
            "transport": _asdict(self.cfg.transport),
            "randomize": self.cfg.randomize,
            "randomization": _asdict(self.cfg.randomization) if self.cfg.randomize else None,
            "source": "live",
        }
        write_records(self.record_path, header, self.records)
        self.last_write = self.record_path
        logger.info("wrote %d ticks to %s", len(self.records), self.record_path)
        return self.record_path

    # -- command path ------------------------------------------------------------------

    def apply_command(self, msg: dict) -> None:
        """Apply one (already latency-delayed) command message."""
        t = self.k / self.cfg.plant.control_hz
        self._last_rx_t = t
        if msg.get("type") != "command":
            return
        self._seq_ack = int(msg.get("seq", self._seq_ack))
        self._latest_cmd = Command(
            vx=float(msg.get("vx", 0.0)),
            wyaw=float(msg.get("wyaw", 0.0)),
            height=float(msg.get("height", self.desc.height_target_walk)),
        )
        # Complete the running ramp before re-anchoring (see gateway.Session).
        span = 1.0 / self.cfg.command_hz
        frac = min(max((t - self._upper_ramp_t0) / span, 0.0), 1.0)
        self._upper_emitted = self._upper_ramp_from + frac * (self._upper_target - self._upper_ramp_from)
        self._upper_ramp_from = self._upper_emitted.copy()
        self._upper_target = map_upper_targets(
            self.desc, arm=msg.get("arm") or None, hand=msg.get("hand") or None
        )
        self._upper_ramp_t0 = t

    def _effective_cmd(self, t: float) -> Command:
        if self._latest_cmd is None:
            return Command(0.0, 0.0, self.desc.height_target_walk)
        cmd = clamp_command(self.desc, self._latest_cmd)
        silent = t - self._last_rx_t
        if silent > self.cfg.heartbeat_timeout:
            f = max(0.0, 1.0 - (silent - self.cfg.heartbeat_timeout) / self.cfg.failsafe_decay)
            cmd = Command(vx=cmd.vx * f, wyaw=cmd.wyaw * f, height=cmd.height)
        return cmd

    # -- control loop --------------------------------------------------------------------

    def step(self) -> None:
        t = self.k / self.cfg.plant.control_hz
        cmd = self._effective_cmd(t)
        span = 1.0 / self.cfg.command_hz
        frac = min(max((t - self._upper_ramp_t0) / span, 0.0), 1.0)
        self._upper_emitted = self._upper_ramp_from + frac * (self._upper_target - self._upper_ramp_from)
        act = ActionCommand(
            lower_targets=height_servo_targets(self.desc, cmd.height),
            upper_targets=self._upper_emitted.copy(),
        )
        state = self.plant.step(act, cmd)
        breakdown = self.engine.evaluate(
            state,
            self._prev_states[-1],
            self._prev_states[-2],
            cmd,
            act,
            self._prev_actions[-1],
            self._prev_actions[-2],
        )
        self.reward_total = breakdown.total
        self.terminated, self.reason = self.plant.terminated()
        if self.recording:
            self.records.append(
                TickRecord(
                    k=self.k,
                    t=t,
                    cmd_vx=cmd.vx,
                    cmd_wyaw=cmd.wyaw,
                    cmd_height=cmd.height,
                    upper_targets=[float(v) for v in act.upper_targets],
                    lower_targets=[float(v) for v in act.lower_targets],
                    base_height=float(state.base_height),
                    base_vel=[float(v) for v in state.base_vel],
                    base_yaw_rate=float(state.base_yaw_rate),
                    tilt=[float(v) for v in state.tilt],
                    foot_contact=[bool(c) for c in state.foot_contact],
                    reward_total=breakdown.total,
                    terminated=self.terminated,
                    reason=self.reason,
                )
            )
        self._prev_states = [self._prev_states[-1], state.copy()]
        self._prev_actions = [self._prev_actions[-1], act]
        self.k += 1
        if self.terminated:
            logger.info("episode terminated (%s); resetting", self.reason)
            if self.recording:
                self.stop_recording()
            self.episode_seed += 1
            self._reset_episode()

    def snapshot(self) -> dict:
        s = self.plant.state
        shown_cmd = (
            clamp_command(self.desc, self._latest_cmd)
            if self._latest_cmd
            else Command(0.0, 0.0, self.desc.height_target_walk)
        )
        return {
            "type": "state",
            "t": self.k / self.cfg.plant.control_hz,
            "height": float(s.base_height),
            "vx": float(s.base_vel[0]),
            "vy": float(s.base_vel[1]),
            "wyaw": float(s.base_yaw_rate),
            "roll": float(s.tilt[0]),
            "pitch": float(s.tilt[1]),
            "contacts": [bool(c) for c in s.foot_contact],
            "reward": self.reward_total,
            "q_lower": [float(v) for v in s.q[self.desc.lower_indices]],
            "q_upper": [float(v) for v in s.q[self.desc.upper_indices]],
            "cmd": {"vx": shown_cmd.vx, "wyaw": shown_cmd.wyaw, "height": shown_cmd.height},
            "seq_ack": self._seq_ack,
            "record": {"active": self.recording, "ticks": len(self.records), "path": self.last_write},
            "terminated": self.terminated,
            "reason": self.reason,
        }

    def hello(self) -> dict:
        desc = self.desc
        arm_joints = [
            {
                "name": desc.joints[i].name,
                "pos_min": desc.joints[i].pos_min,
                "pos_max": desc.joints[i].pos_max,
                "default": desc.joints[i].default_pos,
            }
            for i in desc.arm_indices
        ]
        return {
            "type": "hello",
            "robot": desc.name,
            "control_hz": self.cfg.plant.control_hz,
            "snapshot_hz": SNAPSHOT_HZ,
            "command_hz_min": self.cfg.command_hz,
            "latency_ms": self.cfg.transport.latency_mean * 1000.0,
            "vx_range": list(desc.vx_range),
            "wyaw_range": list(desc.wyaw_range),
            "height_range": list(desc.height_command_range),
            "height_target_walk": desc.height_target_walk,
            "arm_joints": arm_joints,
            "hand_count": int(desc.hand_indices.size),
            "thigh_len": desc.thigh_len,
            "shank_len": desc.shank_len,
            "pelvis_offset": desc.pelvis_offset,
        }


def _asdict(obj) -> dict:
    from dataclasses import asdict

    return asdict(obj)


def build_app(cfg: SessionConfig, record_path: str | None = None, ui_dir: str | Path | None = None) -> FastAPI:
    gw = LiveGateway(cfg, record_path)

    async def control_loop():
        dt = 1.0 / cfg.plant.control_hz
        next_t = time.monotonic()
        while not gw._stop.is_set():
            gw.step()
            next_t += dt
            delay = next_t - time.monotonic()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                next_t = time.monotonic()  # fell behind; don't try to catch up

    async def snapshot_loop():
        while not gw._stop.is_set():
            msg = json.dumps(gw.snapshot())
            for ws in list(gw.clients):
                try:
                    await ws.send_text(msg)
                except Exception:
                    gw.clients.discard(ws)
            await asyncio.sleep(1.0 / SNAPSHOT_HZ)

    from contextlib import asynccontextmanager

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        tasks = [asyncio.create_task(control_loop()), asyncio.create_task(snapshot_loop())]
        yield
        gw._stop.set()
        for task in tasks:
            task.cancel()
        if gw.recording:
            gw.stop_recording()

    app = FastAPI(title="teleopsim gateway", lifespan=lifespan)
    app.state.gateway = gw

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        gw.clients.add(ws)
        await ws.send_text(json.dumps(gw.hello()))
        loop = asyncio.get_running_loop()
        latency = cfg.transport.latency_mean
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg = json.loads(text)
                except json.JSONDecodeError:
                    continue
                kind = msg.get("type")
                if kind in ("command", "heartbeat"):
                    # Model the cockpit->robot link: apply and echo after the
                    # injected latency so the client can measure round trip.
                    def apply_and_echo(m=msg, sock=ws):
                        gw.apply_command(m)
                        echo = {"type": "echo", "seq": m.get("seq"), "t_client": m.get("t_client")}
                        asyncio.ensure_future(_safe_send(sock, json.dumps(echo)))

                    loop.call_later(latency, apply_and_echo)
                elif kind == "record":
                    if msg.get("active"):
                        gw.start_recording()
                    else:
                        gw.stop_recording()
        except WebSocketDisconnect:
            pass
        finally:
            gw.clients.discard(ws)
            if gw.recording and not gw.clients:
                gw.stop_recording()

    async def _safe_send(ws: WebSocket, text: str):
        try:
            await ws.send_text(text)
        except Exception:
            gw.clients.discard(ws)

    ui = Path(ui_dir) if ui_dir else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if ui.is_dir():
        app.mount("/", StaticFiles(directory=str(ui), html=True), name="ui")
    else:

        @app.get("/")
        async def index() -> HTMLResponse:
            return HTMLResponse(FALLBACK_PAGE)

    return app


def serve(
    cfg: SessionConfig,
    host: str = "127.0.0.1",
    port: int = 8330,
    record_path: str | None = None,
    ui_dir: str | None = None,
) -> None:
    import uvicorn

    app = build_app(cfg, record_path, ui_dir)
    logger.info(
        "gateway for %s on %s:%d (latency %.1f ms)",
        cfg.robot,
        host,
        port,
        cfg.transport.latency_mean * 1000.0,
    )
    uvicorn.run(app, host=host, port=port, log_level="warning")
