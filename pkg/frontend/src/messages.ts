// Message shapes exchanged with the gateway over the WebSocket.
//
// Command messages are a field-for-field text mirror of the binary
// version-1 command frame: sequence number plus the 32-float payload split
// into [vx, wyaw, height], 14 arm targets and 14 hand targets (the reserved
// slot is omitted). The gateway re-clamps everything server-side.

export const ARM_SLOTS = 14;
export const HAND_SLOTS = 14;

export interface CommandMessage {
  type: "command";
  seq: number;
  t_client: number;
  vx: number;
  wyaw: number;
  height: number;
  arm: number[];
  hand: number[];
}

export interface HeartbeatMessage {
  type: "heartbeat";
  seq: number;
  t_client: number;
}

export interface RecordMessage {
  type: "record";
  active: boolean;
}

export interface ArmJointInfo {
  name: string;
  pos_min: number;
  pos_max: number;
  default: number;
}

export interface HelloMessage {
  type: "hello";
  robot: string;
  control_hz: number;
  snapshot_hz: number;
  latency_ms: number;
  vx_range: [number, number];
  wyaw_range: [number, number];
  height_range: [number, number];
  height_target_walk: number;
  arm_joints: ArmJointInfo[];
  hand_count: number;
  thigh_len: number;
  shank_len: number;
  pelvis_offset: number;
}

export interface StateMessage {
  type: "state";
  t: number;
  height: number;
  vx: number;
  vy: number;
  wyaw: number;
  roll: number;
  pitch: number;
  contacts: boolean[];
  reward: number;
  q_lower: number[];
  q_upper: number[];
  cmd: { vx: number; wyaw: number; height: number };
  seq_ack: number;
  record: { active: boolean; ticks: number; path: string | null };
  terminated: boolean;
  reason: string | null;
}

export interface EchoMessage {
  type: "echo";
  seq: number;
  t_client: number;
}

export type ServerMessage = HelloMessage | StateMessage | EchoMessage;

export function parseServerMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const kind = (raw as { type?: unknown }).type;
  if (kind === "hello" || kind === "state" || kind === "echo") {
    return raw as ServerMessage;
  }
  return null;
}

export function buildCommand(
  seq: number,
  tClient: number,
  vx: number,
  wyaw: number,
  height: number,
  arm: readonly number[],
  hand: readonly number[],
): CommandMessage {
  if (arm.length !== ARM_SLOTS) throw new Error(`arm needs ${ARM_SLOTS} slots, got ${arm.length}`);
  if (hand.length !== HAND_SLOTS) throw new Error(`hand needs ${HAND_SLOTS} slots, got ${hand.length}`);
  return {
    type: "command",
    seq,
    t_client: tClient,
    vx,
    wyaw,
    height,
    arm: [...arm],
    hand: [...hand],
  };
}
