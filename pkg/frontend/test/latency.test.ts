import { describe, expect, it } from "vitest";

import { LatencyTracker } from "../src/latency.js";

describe("LatencyTracker", () => {
  it("displays the injected round trip within tolerance", () => {
    // Gateway injects 16 ms before echoing; event-loop noise adds ~0-3 ms.
    const tracker = new LatencyTracker();
    let now = 1000;
    for (let i = 0; i < 60; i++) {
      const sent = now;
      now += 16 + Math.sin(i) * 1.5; // bounded jitter around the injected value
      tracker.onEcho(sent, now);
      now += 17;
    }
    expect(tracker.displayMs).not.toBeNull();
    expect(Math.abs((tracker.displayMs as number) - 16)).toBeLessThan(10);
  });

  it("first echo seeds the average directly", () => {
    const tracker = new LatencyTracker();
    tracker.onEcho(100, 120);
    expect(tracker.displayMs).toBe(20);
    expect(tracker.lastMs).toBe(20);
  });

  it("smooths a level shift gradually", () => {
    const tracker = new LatencyTracker(0.2);
    for (let i = 0; i < 50; i++) tracker.onEcho(0, 16);
    expect(tracker.displayMs).toBeCloseTo(16, 6);
    tracker.onEcho(0, 40);
    expect(tracker.displayMs).toBeGreaterThan(16);
    expect(tracker.displayMs).toBeLessThan(40);
  });

  it("clamps clock skew to zero", () => {
    const tracker = new LatencyTracker();
    tracker.onEcho(200, 190);
    expect(tracker.lastMs).toBe(0);
  });
});
