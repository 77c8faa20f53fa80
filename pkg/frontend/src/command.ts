// Command streamer: snapshots the cockpit state at a fixed rate (30 Hz
// minimum) and emits command messages with strictly increasing sequence
// numbers. The gateway coalesces to the newest packet, so over-sending is
// harmless; under-sending trips the robot-side heartbeat failsafe.

import { CommandMessage, buildCommand } from "./messages.js";
import { CommandState } from "./state.js";

export const SEND_HZ = 30;

export class CommandStreamer {
  private seq = 0;
  readonly intervalMs: number;

  constructor(rate_hz: number = SEND_HZ) {
    this.intervalMs = 1000 / rate_hz;
  }

  get nextSeq(): number {
    return this.seq;
  }

  snapshot(state: CommandState, tClient: number): CommandMessage {
    const cmd = state.command();
    return buildCommand(this.seq++, tClient, cmd.vx, cmd.wyaw, cmd.height, state.arm, state.hand);
  }

  // Number of sends due in a window; used by the shell's timer and by tests.
  sendsDue(elapsedMs: number): number {
    return Math.floor(elapsedMs / this.intervalMs);
  }
}
