import { describe, expect, it } from "vitest";

import { ARM_SLOTS, HAND_SLOTS, HelloMessage, StateMessage, buildCommand, parseServerMessage } from "../src/messages.js";

import golden from "./golden_messages.json";

describe("command mirror vs binary layout", () => {
  it("mirrors the binary frame field for field", () => {
    // golden.binary_command holds the decoded binary frame; mirror_inputs the
    // values that built it. The JSON mirror must carry the same logical fields.
    const inp = golden.mirror_inputs;
    const bin = golden.binary_command;
    const msg = buildCommand(inp.seq, 0, inp.vx, inp.wyaw, inp.height, inp.arm, inp.hand);
    expect(msg.seq).toBe(bin.seq);
    // binary payload stores float32; the mirror carries full-precision JSON
    expect(msg.vx).toBeCloseTo(bin.vx, 6);
    expect(msg.wyaw).toBeCloseTo(bin.wyaw, 6);
    expect(msg.height).toBeCloseTo(bin.height, 6);
    expect(msg.arm).toHaveLength(bin.arm.length);
    expect(msg.hand).toHaveLength(bin.hand.length);
    msg.arm.forEach((v, i) => expect(v).toBeCloseTo(bin.arm[i], 5));
    msg.hand.forEach((v, i) => expect(v).toBeCloseTo(bin.hand[i], 5));
  });

  it("matches the binary slot budget", () => {
    expect(ARM_SLOTS + HAND_SLOTS + 3 + 1).toBe(golden.binary_command.payload_floats);
    expect(golden.binary_command.payload_bytes).toBe(128);
    expect(golden.binary_command.frame_bytes).toBe(142);
  });

  it("rejects wrong slot counts", () => {
    expect(() => buildCommand(0, 0, 0, 0, 0.7, new Array(13).fill(0), new Array(14).fill(0))).toThrow();
  });
});

describe("server message parsing", () => {
  it("parses the gateway hello", () => {
    const msg = parseServerMessage(JSON.stringify(golden.hello)) as HelloMessage;
    expect(msg?.type).toBe("hello");
    expect(msg.robot).toBe("g1");
    expect(msg.arm_joints).toHaveLength(14);
    expect(msg.vx_range).toEqual([-0.8, 1.2]);
    expect(msg.height_range[1]).toBe(0.74);
  });

  it("parses a gateway state snapshot", () => {
    const msg = parseServerMessage(JSON.stringify(golden.state)) as StateMessage;
    expect(msg?.type).toBe("state");
    expect(msg.q_lower).toHaveLength(12);
    expect(msg.contacts).toHaveLength(2);
    expect(typeof msg.height).toBe("number");
    expect(msg.record).toHaveProperty("active");
  });

  it("ignores junk", () => {
    expect(parseServerMessage("not json")).toBeNull();
    expect(parseServerMessage('{"type":"mystery"}')).toBeNull();
    expect(parseServerMessage("42")).toBeNull();
  });
});
