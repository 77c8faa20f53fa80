import { describe, expect, it } from "vitest";

import { HelloMessage } from "../src/messages.js";
import { CommandState, GRIP_PRESETS, HAND_CURL_MAX } from "../src/state.js";

import golden from "./golden_messages.json";

function ready(): CommandState {
  const s = new CommandState();
  s.applyHello(golden.hello as HelloMessage);
  return s;
}

describe("CommandState", () => {
  it("is inert before the handshake", () => {
    const s = new CommandState();
    expect(s.ready).toBe(false);
    expect(s.command()).toEqual({ vx: 0, wyaw: 0, height: 0 });
  });

  it("arm sliders initialize to the robot defaults", () => {
    const s = ready();
    const hello = golden.hello as HelloMessage;
    hello.arm_joints.forEach((j, i) => expect(s.arm[i]).toBe(j.default));
  });

  it("arm values clamp to handshake limits", () => {
    const s = ready();
    const hello = golden.hello as HelloMessage;
    s.setArm(0, 99);
    expect(s.arm[0]).toBe(hello.arm_joints[0].pos_max);
    s.setArm(0, -99);
    expect(s.arm[0]).toBe(hello.arm_joints[0].pos_min);
  });

  it("grip presets curl every hand slot", () => {
    const s = ready();
    const fist = GRIP_PRESETS.find((g) => g.name === "fist")!;
    s.setGrip(fist.curl);
    for (const v of s.hand) expect(v).toBeCloseTo(fist.curl * HAND_CURL_MAX, 12);
    s.setGrip(0);
    for (const v of s.hand) expect(v).toBe(0);
  });

  it("per-finger overrides clamp to the curl range", () => {
    const s = ready();
    s.setFinger(3, 99);
    expect(s.hand[3]).toBe(HAND_CURL_MAX);
  });

  it("commands track the pedals once ready", () => {
    const s = ready();
    s.travel = { velocity: 0.5, turn: 0, height: 0 };
    expect(s.command().vx).toBeCloseTo(0.6, 12);
  });
});
