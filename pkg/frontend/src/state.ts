// Cockpit command state: the single source of truth snapshotted by the
// command stream. Arm slider values clamp to the joint limits received in
// the gateway handshake; the UI never sends out-of-range values (the
// gateway re-clamps anyway).

import { ARM_SLOTS, HAND_SLOTS, ArmJointInfo, HelloMessage } from "./messages.js";
import { Command, PedalToggles, PedalTravel, RobotRanges, clampToRanges, pedalCommand } from "./pedal.js";

export interface GripPreset {
  name: string;
  curl: number; // 0 = open, 1 = closed
}

export const GRIP_PRESETS: GripPreset[] = [
  { name: "open", curl: 0.0 },
  { name: "half", curl: 0.45 },
  { name: "fist", curl: 0.95 },
];

// Canonical hand-joint curl range; the gateway clamps to the robot's real limits.
export const HAND_CURL_MAX = 1.6;

export class CommandState {
  travel: PedalTravel = { velocity: 0, turn: 0, height: 0 };
  toggles: PedalToggles = { forward: true, left: true };
  arm: number[] = new Array(ARM_SLOTS).fill(0);
  hand: number[] = new Array(HAND_SLOTS).fill(0);
  private ranges: RobotRanges | null = null;
  private armJoints: ArmJointInfo[] = [];

  applyHello(hello: HelloMessage): void {
    this.ranges = {
      vxRange: hello.vx_range,
      wyawRange: hello.wyaw_range,
      heightRange: hello.height_range,
    };
    this.armJoints = hello.arm_joints.slice(0, ARM_SLOTS);
    this.arm = this.armJoints.map((j) => j.default);
    while (this.arm.length < ARM_SLOTS) this.arm.push(0);
  }

  get ready(): boolean {
    return this.ranges !== null;
  }

  armJointInfo(i: number): ArmJointInfo | undefined {
    return this.armJoints[i];
  }

  setArm(i: number, value: number): void {
    const info = this.armJoints[i];
    const lo = info ? info.pos_min : -Math.PI;
    const hi = info ? info.pos_max : Math.PI;
    this.arm[i] = Math.min(Math.max(value, lo), hi);
  }

  setGrip(curl: number): void {
    const c = Math.min(Math.max(curl, 0), 1);
    this.hand = this.hand.map(() => c * HAND_CURL_MAX);
  }

  setFinger(i: number, value: number): void {
    this.hand[i] = Math.min(Math.max(value, -HAND_CURL_MAX), HAND_CURL_MAX);
  }

  command(): Command {
    if (!this.ranges) return { vx: 0, wyaw: 0, height: 0 };
    const cmd = pedalCommand(this.travel, this.toggles, this.ranges);
    return clampToRanges(cmd, this.ranges); // belt and braces: never out of range
  }
}
