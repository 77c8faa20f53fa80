"""Session orchestrator: binds a cockpit command source to a plant instance.

One session owns one plant, one reward engine, a simulated channel pair and
the control loop. The loop runs at the plant's control rate on a virtual
clock (tick k at exactly k / control_hz seconds): decode newest command
packet, clamp to ranges, ramp upper-body targets piecewise-linearly over one
command interval, run the scripted lower-body height servo, step the plant,
evaluate rewards, stream a state packet back, append a tick record.

Failsafe: until the first packet arrives the command is zero velocity at the
walking height, so an idle robot never moves. If the client goes silent for
longer than the heartbeat timeout, commanded velocities decay linearly to
zero over the failsafe window while height and posture hold.

Commands are coalesced: only the newest decoded command packet drives the
tick (stale packets are dropped). Corrupt packets are counted and ignored.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import protocol
from .controller import height_servo_targets
from .errors import ConfigError
from .observation import Command, clamp_command
from .plant import ActionCommand, Plant, PlantConfig
from .randomize import RandomizationConfig, episode_gains, sample_episode
from .records import TickRecord, digest_records, read_records, write_records
from .rewards import RewardEngine, load_reward
from .robot import RobotDescription, load_robot
from .transport import SimulatedLink, TransportConfig, VirtualClock, channel_pair

logger = logging.getLogger(__name__)

# State-packet payload slots (version-1 frame, type=state; see PROTOCOL.md).
STATE_SLOT_T = 0
STATE_SLOT_HEIGHT = 1
STATE_SLOT_VX = 2
STATE_SLOT_VY = 3
STATE_SLOT_VZ = 4
STATE_SLOT_WYAW = 5
STATE_SLOT_ROLL = 6
STATE_SLOT_PITCH = 7
STATE_SLOT_CONTACT_L = 8
STATE_SLOT_CONTACT_R = 9
STATE_SLOT_REWARD = 10
STATE_SLOT_SEQ_ACK = 11
STATE_SLOT_Q_LOWER = 12  # twelve lower-body joint angles follow


@dataclass(frozen=True)
class SessionConfig:
    """Everything needed to reproduce a session bit-for-bit."""

    robot: str = "g1"
    reward: str | None = None
    seed: int = 0
    command_hz: float = 10.0
    heartbeat_timeout: float = 0.5
    failsafe_decay: float = 0.5
    plant: PlantConfig = field(default_factory=lambda: PlantConfig(pd_reference="current"))
    transport: TransportConfig = field(default_factory=TransportConfig)
    randomize: bool = False
    randomization: RandomizationConfig = field(default_factory=RandomizationConfig)
    record_terms: bool = False

    def __post_init__(self):
        steps = self.plant.control_hz / self.command_hz
        if abs(steps - round(steps)) > 1e-9 or steps < 1:
            raise ConfigError(
                f"control rate {self.plant.control_hz} must be an integer multiple "
                f"of command rate {self.command_hz}"
            )

    @property
    def interp_steps(self) -> int:
        return round(self.plant.control_hz / self.command_hz)


class ScriptedSource:
    """Command source replaying keyframes at the command rate.

    ``keyframes`` is a list of dicts with ``t`` plus any of ``vx``, ``wyaw``,
    ``height``, ``arm``, ``hand``; values hold piecewise-constant between
    keyframes. Packets are emitted at exact command-rate instants.
    """

    def __init__(self, keyframes: list[dict], desc: RobotDescription, command_hz: float = 10.0):
        self.command_hz = command_hz
        self.keyframes = sorted(keyframes, key=lambda kf: kf["t"])
        self._default_height = desc.height_target_walk
        self._next_j = 0

    def _frame_at(self, t: float) -> dict:
        current: dict = {}
        for kf in self.keyframes:
            if kf["t"] <= t + 1e-12:
                current = kf
            else:
                break
        return current

    def packets(self, until_t: float) -> list[tuple[float, bytes]]:
        out = []
        while self._next_j / self.command_hz <= until_t + 1e-12:
            t_send = self._next_j / self.command_hz
            kf = self._frame_at(t_send)
            pkt = protocol.make_command(
                seq=self._next_j,
                vx=kf.get("vx", 0.0),
                wyaw=kf.get("wyaw", 0.0),
                height=kf.get("height", self._default_height),
                arm=np.asarray(kf["arm"], dtype=float) if "arm" in kf else None,
                hand=np.asarray(kf["hand"], dtype=float) if "hand" in kf else None,
            )
            out.append((t_send, protocol.encode(pkt)))
            self._next_j += 1
        return out


class SilentSource:
    """A client that never sends anything (failsafe exercise)."""

    def packets(self, until_t: float) -> list[tuple[float, bytes]]:
        return []


def make_state_packet(seq: int, state, reward_total: float, seq_ack: int, n_lower: int) -> protocol.CommandPacket:
    payload = np.zeros(protocol.FIXED_PAYLOAD_FLOATS, dtype="<f4")
    payload[STATE_SLOT_T] = state.t
    payload[STATE_SLOT_HEIGHT] = float(state.base_height)
    payload[STATE_SLOT_VX] = float(state.base_vel[0])
    payload[STATE_SLOT_VY] = float(state.base_vel[1])
    payload[STATE_SLOT_VZ] = float(state.base_vel[2])
    payload[STATE_SLOT_WYAW] = float(state.base_yaw_rate)
    payload[STATE_SLOT_ROLL] = float(state.tilt[0])
    payload[STATE_SLOT_PITCH] = float(state.tilt[1])
    payload[STATE_SLOT_CONTACT_L] = float(state.foot_contact[0])
    payload[STATE_SLOT_CONTACT_R] = float(state.foot_contact[1])
    payload[STATE_SLOT_REWARD] = reward_total
    payload[STATE_SLOT_SEQ_ACK] = float(seq_ack)
    q_lower = state.last_action
    n = min(n_lower, protocol.FIXED_PAYLOAD_FLOATS - STATE_SLOT_Q_LOWER, q_lower.shape[-1])
    payload[STATE_SLOT_Q_LOWER : STATE_SLOT_Q_LOWER + n] = q_lower[:n]
    return protocol.CommandPacket(ptype=protocol.TYPE_STATE, seq=seq, payload=payload)


def map_upper_targets(
    desc: RobotDescription,
    arm: np.ndarray | None = None,
    hand: np.ndarray | None = None,
    joint_list: np.ndarray | None = None,
) -> np.ndarray:
    """Map cockpit arm/hand target slots onto a robot's upper joints.

    Slots fill the robot's arm and hand joints in inventory order; joints
    without a slot (the waist, extra fingers) hold their defaults. Targets
    clamp to position limits. A version-2 joint list fills all upper joints
    in order instead.
    """
    targets = desc.default_pos.copy()
    if joint_list is not None:
        listed = np.asarray(joint_list, dtype=float)
        upper = desc.upper_indices[: listed.size]
        targets[upper] = listed[: upper.size]
    else:
        if arm is not None:
            arm = np.asarray(arm, dtype=float)
            n = min(arm.size, desc.arm_indices.size)
            targets[desc.arm_indices[:n]] = arm[:n]
        if hand is not None:
            hand = np.asarray(hand, dtype=float)
            n = min(hand.size, desc.hand_indices.size)
            targets[desc.hand_indices[:n]] = hand[:n]
    targets = np.clip(targets, desc.pos_min, desc.pos_max)
    return targets[desc.upper_indices]


class Session:
    """One control-loop executor owning the plant (single stepper)."""

    def __init__(self, cfg: SessionConfig, source, clock: VirtualClock | None = None):
        self.cfg = cfg
        self.source = source
        self.desc = load_robot(cfg.robot)
        self.reward_cfg = load_reward(cfg.reward or self.desc.name)
        self.clock = clock or VirtualClock()

        ss = np.random.SeedSequence(cfg.seed)
        ss_rand, ss_plant, ss_transport = ss.spawn(3)
        gains = None
        init_q = None
        self.randomization = None
        if cfg.randomize:
            self.randomization = sample_episode(self.desc, cfg.randomization, np.random.default_rng(ss_rand))
            gains = episode_gains(self.desc, cfg.plant, self.randomization)
            init_q = self.randomization.init_q
            rand = self.randomization
            logger.info(
                "episode randomization: %s",
                json.dumps(
                    {
                        "torso_payload": rand.torso_payload,
                        "hand_payload": rand.hand_payload.tolist(),
                        "com_displacement": rand.com_displacement.tolist(),
                        "friction": rand.friction,
                        "restitution": rand.restitution,
                        "kp_scale_mean": float(rand.kp_scale.mean()),
                        "kd_scale_mean": float(rand.kd_scale.mean()),
                        "link_mass_scale_mean": float(rand.link_mass_scale.mean()),
                    }
                ),
            )
        self.plant = Plant(self.desc, cfg.plant, seed=ss_plant, gains=gains, init_q=init_q)
        self.engine = RewardEngine(self.desc, self.reward_cfg, pd_reference=cfg.plant.pd_reference)
        self.uplink, self.downlink = channel_pair(cfg.transport, self.clock, np.random.default_rng(ss_transport))

        upper_defaults = self.desc.default_pos[self.desc.upper_indices]
        self._upper_emitted = upper_defaults.copy()
        self._upper_ramp_from = upper_defaults.copy()
        self._upper_target = upper_defaults.copy()
        self._upper_ramp_t0 = -np.inf

        self._latest_cmd: Command | None = None
        self._last_rx: float = -np.inf
        self._seq_ack = 0
        self.bad_packets = 0
        self.records: list[TickRecord] = []

        act0 = ActionCommand(
            lower_targets=self.desc.default_pos[self.desc.lower_indices].copy(),
            upper_targets=upper_defaults.copy(),
        )
        self._prev_states = [self.plant.state.copy(), self.plant.state.copy()]
        self._prev_actions = [act0, act0]

    # -- command handling -------------------------------------------------------------

    def _map_upper_targets(self, pkt: protocol.CommandPacket) -> np.ndarray:
        if pkt.version == protocol.VERSION_JOINT_LIST:
            return map_upper_targets(self.desc, joint_list=protocol.joint_list_targets(pkt))
        return map_upper_targets(self.desc, arm=pkt.arm_targets, hand=pkt.hand_targets)

    def _ingest(self, t: float) -> None:
        for t_send, buf in self.source.packets(t):
            self.uplink.send_at(t_send, buf)
        newest = None
        for arrival, buf in self.uplink.poll():
            try:
                pkt = protocol.decode(buf)
            except Exception:
                self.bad_packets += 1
                continue
            self._last_rx = arrival
            if pkt.ptype == protocol.TYPE_COMMAND:
                newest = pkt
        if newest is not None:
            self._seq_ack = newest.seq
            self._latest_cmd = Command(vx=newest.vx, wyaw=newest.wyaw, height=newest.height)
            # Complete the running ramp at the arrival instant, then anchor the
            # new one there: a packet train at the command rate yields exactly
            # control_hz / command_hz interpolation substeps per interval.
            self._upper_ramp_from = self._upper_at(t)
            self._upper_target = self._map_upper_targets(newest)
            self._upper_ramp_t0 = t

    def _effective_cmd(self, t: float) -> Command:
        if self._latest_cmd is None:
            # Never commanded: hold still at the walking height.
            return Command(0.0, 0.0, self.desc.height_target_walk)
        cmd = clamp_command(self.desc, self._latest_cmd)
        silent = t - self._last_rx
        if silent > self.cfg.heartbeat_timeout:
            f = max(0.0, 1.0 - (silent - self.cfg.heartbeat_timeout) / self.cfg.failsafe_decay)
            cmd = Command(vx=cmd.vx * f, wyaw=cmd.wyaw * f, height=cmd.height)
        return cmd

    def _upper_at(self, t: float) -> np.ndarray:
        span = 1.0 / self.cfg.command_hz
        frac = min(max((t - self._upper_ramp_t0) / span, 0.0), 1.0)
        self._upper_emitted = self._upper_ramp_from + frac * (self._upper_target - self._upper_ramp_from)
        return self._upper_emitted.copy()

    # -- main loop ----------------------------------------------------------------------

    def run(self, seconds: float) -> list[TickRecord]:
        cfg = self.cfg
        hz = cfg.plant.control_hz
        n_ticks = round(seconds * hz)
        for k in range(n_ticks):
            t = k / hz
            self.clock.advance_to(t)
            self._ingest(t)
            cmd = self._effective_cmd(t)
            act = ActionCommand(
                lower_targets=height_servo_targets(self.desc, cmd.height),
                upper_targets=self._upper_at(t),
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
            terminated, reason = self.plant.terminated()
            self.records.append(
                TickRecord(
                    k=k,
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
                    terminated=terminated,
                    reason=reason,
                    reward_terms={n: w for n, (_, w) in breakdown.terms.items()} if cfg.record_terms else None,
                )
            )
            self.downlink.send(
                protocol.encode(make_state_packet(k, state, breakdown.total, self._seq_ack, self.desc.n_lower))
            )
            self._prev_states = [self._prev_states[-1], state.copy()]
            self._prev_actions = [self._prev_actions[-1], act]
            if terminated:
                logger.info("session terminated at t=%.3f (%s)", t, reason)
                break
        return self.records

    def header(self) -> dict:
        return {
            "robot": self.cfg.robot,
            "reward": self.reward_cfg.name,
            "seed": self.cfg.seed,
            "command_hz": self.cfg.command_hz,
            "heartbeat_timeout": self.cfg.heartbeat_timeout,
            "failsafe_decay": self.cfg.failsafe_decay,
            "plant": asdict(self.cfg.plant),
            "transport": asdict(self.cfg.transport),
            "randomize": self.cfg.randomize,
            "randomization": asdict(self.cfg.randomization) if self.cfg.randomize else None,
        }

    def save(self, path: str | Path) -> None:
        write_records(path, self.header(), self.records)


def _plant_from_dict(d: dict) -> PlantConfig:
    d = dict(d)
    d["push_vel_range"] = tuple(d["push_vel_range"])
    return PlantConfig(**d)


def _randomization_from_dict(d: dict) -> RandomizationConfig:
    kwargs = {k: (v if isinstance(v, str) else tuple(v)) for k, v in d.items()}
    return RandomizationConfig(**kwargs)


def replay(path: str | Path, seed: int | None = None) -> str:
    """Re-execute a record file's command stream and return the digest.

    The recorded per-tick inputs (command, lower and upper targets) drive a
    fresh plant built from the header (same seed unless overridden); rewards
    are re-evaluated. A successful reproduction yields exactly the digest
    stored in the file.
    """
    header, records = read_records(path)
    desc = load_robot(header["robot"])
    plant_cfg = _plant_from_dict(header["plant"])
    use_seed = header["seed"] if seed is None else seed

    ss = np.random.SeedSequence(use_seed)
    ss_rand, ss_plant, _ = ss.spawn(3)
    gains = None
    init_q = None
    if header.get("randomize"):
        rand_cfg = _randomization_from_dict(header["randomization"])
        rand = sample_episode(desc, rand_cfg, np.random.default_rng(ss_rand))
        gains = episode_gains(desc, plant_cfg, rand)
        init_q = rand.init_q
    plant = Plant(desc, plant_cfg, seed=ss_plant, gains=gains, init_q=init_q)
    engine = RewardEngine(desc, load_reward(header["reward"]), pd_reference=plant_cfg.pd_reference)

    act0 = ActionCommand(
        lower_targets=desc.default_pos[desc.lower_indices].copy(),
        upper_targets=desc.default_pos[desc.upper_indices].copy(),
    )
    prev_states = [plant.state.copy(), plant.state.copy()]
    prev_actions = [act0, act0]
    out: list[TickRecord] = []
    for r in records:
        cmd = Command(r.cmd_vx, r.cmd_wyaw, r.cmd_height)
        act = ActionCommand(
            lower_targets=np.array(r.lower_targets), upper_targets=np.array(r.upper_targets)
        )
        state = plant.step(act, cmd)
        breakdown = engine.evaluate(
            state, prev_states[-1], prev_states[-2], cmd, act, prev_actions[-1], prev_actions[-2]
        )
        terminated, reason = plant.terminated()
        out.append(
            TickRecord(
                k=r.k,
                t=r.t,
                cmd_vx=cmd.vx,
                cmd_wyaw=cmd.wyaw,
                cmd_height=cmd.height,
                upper_targets=r.upper_targets,
                lower_targets=r.lower_targets,
                base_height=float(state.base_height),
                base_vel=[float(v) for v in state.base_vel],
                base_yaw_rate=float(state.base_yaw_rate),
                tilt=[float(v) for v in state.tilt],
                foot_contact=[bool(c) for c in state.foot_contact],
                reward_total=breakdown.total,
                terminated=terminated,
                reason=reason,
            )
        )
        prev_states = [prev_states[-1], state.copy()]
        prev_actions = [prev_actions[-1], act]
    return digest_records(out)
