// Keyboard/gamepad to pedal mapping. Pure reducer functions so the logic is
// testable without a DOM: the shell feeds key events and gamepad samples in,
// and reads pedal travel fractions plus latched toggles out.
//
// Default bindings: W velocity pedal, A turn pedal, S height pedal,
// R toggles forward/backward, T toggles left/right, SPACE record.

import { PedalToggles, PedalTravel, clamp01 } from "./pedal.js";

export interface KeyBindings {
  velocity: string;
  turn: string;
  height: string;
  directionToggle: string;
  turnToggle: string;
  record: string;
}

export const DEFAULT_BINDINGS: KeyBindings = {
  velocity: "w",
  turn: "a",
  height: "s",
  directionToggle: "r",
  turnToggle: "t",
  record: " ",
};

export interface InputState {
  travel: PedalTravel;
  toggles: PedalToggles;
  recordPressed: boolean;
  held: Set<string>;
}

export function initialInput(): InputState {
  return {
    travel: { velocity: 0, turn: 0, height: 0 },
    toggles: { forward: true, left: true },
    recordPressed: false,
    held: new Set(),
  };
}

// Key press/release. OS auto-repeat delivers repeated keydown events while a
// key is held; toggles latch exactly once per physical press via the held set.
export function keyEvent(state: InputState, key: string, down: boolean, bindings = DEFAULT_BINDINGS): InputState {
  const k = key.toLowerCase();
  const wasHeld = state.held.has(k);
  const held = new Set(state.held);
  if (down) held.add(k);
  else held.delete(k);

  const travel = { ...state.travel };
  if (k === bindings.velocity) travel.velocity = down ? 1 : 0;
  if (k === bindings.turn) travel.turn = down ? 1 : 0;
  if (k === bindings.height) travel.height = down ? 1 : 0;

  const toggles = { ...state.toggles };
  let recordPressed = state.recordPressed;
  if (down && !wasHeld) {
    if (k === bindings.directionToggle) toggles.forward = !toggles.forward;
    if (k === bindings.turnToggle) toggles.left = !toggles.left;
    if (k === bindings.record) recordPressed = true;
  }
  return { travel, toggles, recordPressed, held };
}

export function consumeRecordPress(state: InputState): [boolean, InputState] {
  if (!state.recordPressed) return [false, state];
  return [true, { ...state, recordPressed: false }];
}

export interface GamepadSample {
  axes: readonly number[];
  buttons: readonly number[]; // pressed values in [0, 1]
}

export const GAMEPAD_DEADZONE = 0.08;

// Signed sticks carry direction: the sign sets the toggle, the magnitude the
// travel. Axis 1 (left stick vertical, up = negative) drives velocity, axis 0
// drives turning (left = negative stick = left turn), axis 3 drives height.
export function applyGamepad(state: InputState, pad: GamepadSample): InputState {
  const dead = (v: number) => (Math.abs(v) < GAMEPAD_DEADZONE ? 0 : v);
  const vel = dead(-(pad.axes[1] ?? 0));
  const turn = dead(-(pad.axes[0] ?? 0));
  const height = dead(pad.axes[3] ?? 0);
  if (vel === 0 && turn === 0 && height === 0) return state;

  const travel: PedalTravel = {
    velocity: clamp01(Math.abs(vel)),
    turn: clamp01(Math.abs(turn)),
    height: clamp01(Math.abs(height)),
  };
  const toggles: PedalToggles = {
    forward: vel !== 0 ? vel > 0 : state.toggles.forward,
    left: turn !== 0 ? turn > 0 : state.toggles.left,
  };
  return { ...state, travel, toggles };
}
