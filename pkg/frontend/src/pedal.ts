// Pedal semantics, mirroring the gateway's cockpit mapping: the velocity
// pedal scales to the robot's forward range (or the smaller backward range
// when toggled), the turn pedal maps to yaw rate with left = positive, and
// pressing the height pedal lowers the base from the walking height toward
// the bottom of the reachable squat window. Toggles change only the sign.

export interface RobotRanges {
  vxRange: [number, number];
  wyawRange: [number, number];
  heightRange: [number, number];
}

export interface PedalTravel {
  velocity: number;
  turn: number;
  height: number;
}

export interface PedalToggles {
  forward: boolean;
  left: boolean;
}

export interface Command {
  vx: number;
  wyaw: number;
  height: number;
}

export function clamp01(v: number): number {
  return Math.min(Math.max(v, 0), 1);
}

export function pedalCommand(travel: PedalTravel, toggles: PedalToggles, ranges: RobotRanges): Command {
  const v = clamp01(travel.velocity);
  const w = clamp01(travel.turn);
  const h = clamp01(travel.height);
  const vx = v * (toggles.forward ? ranges.vxRange[1] : ranges.vxRange[0]);
  const wyaw = w * (toggles.left ? ranges.wyawRange[1] : ranges.wyawRange[0]);
  const [hLo, hHi] = ranges.heightRange;
  return { vx, wyaw, height: hHi - h * (hHi - hLo) };
}

export function clampToRanges(cmd: Command, ranges: RobotRanges): Command {
  const clamp = (v: number, lo: number, hi: number) => Math.min(Math.max(v, lo), hi);
  return {
    vx: clamp(cmd.vx, ranges.vxRange[0], ranges.vxRange[1]),
    wyaw: clamp(cmd.wyaw, ranges.wyawRange[0], ranges.wyawRange[1]),
    height: clamp(cmd.height, ranges.heightRange[0], ranges.heightRange[1]),
  };
}
