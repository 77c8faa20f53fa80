// Cockpit shell: wires input, command streaming, the live view and the
// record toggle to the gateway WebSocket. The view renders only
// gateway-acknowledged state; nothing in the browser simulates the robot.

import { CommandStreamer } from "./command.js";
import { DEFAULT_BINDINGS, applyGamepad, consumeRecordPress, initialInput, keyEvent } from "./input.js";
import { LatencyTracker } from "./latency.js";
import { HelloMessage, StateMessage, parseServerMessage } from "./messages.js";
import { CommandState, GRIP_PRESETS } from "./state.js";
import { RobotView } from "./view.js";

function wsUrl(): string {
  const loc = window.location;
  const proto = loc.protocol === "https:" ? "wss:" : "ws:";
  const token = new URLSearchParams(loc.search).get("token");
  return `${proto}//${loc.host}/ws${token ? `?token=${token}` : ""}`;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("view");
const banner = el<HTMLDivElement>("banner");
const recordBtn = el<HTMLButtonElement>("record");
const recordInfo = el<HTMLSpanElement>("record-info");
const armBox = el<HTMLDivElement>("arm-sliders");
const gripBox = el<HTMLDivElement>("grips");
const pedalBars = {
  velocity: el<HTMLProgressElement>("pedal-velocity"),
  turn: el<HTMLProgressElement>("pedal-turn"),
  height: el<HTMLProgressElement>("pedal-height"),
};
const toggleLabels = {
  forward: el<HTMLSpanElement>("dir-mode"),
  left: el<HTMLSpanElement>("turn-mode"),
};

const view = new RobotView(canvas);
const cmdState = new CommandState();
const streamer = new CommandStreamer();
const latency = new LatencyTracker();

let input = initialInput();
let lastState: StateMessage | null = null;
let connected = false;
let socket: WebSocket | null = null;

function setBanner(text: string, kind: "ok" | "warn" | "bad"): void {
  banner.textContent = text;
  banner.className = `banner ${kind}`;
}

function buildArmSliders(hello: HelloMessage): void {
  armBox.innerHTML = "";
  hello.arm_joints.forEach((j, i) => {
    const row = document.createElement("label");
    row.className = "slider-row";
    const name = document.createElement("span");
    name.textContent = j.name;
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = String(j.pos_min);
    slider.max = String(j.pos_max);
    slider.step = "0.01";
    slider.value = String(j.default);
    slider.addEventListener("input", () => cmdState.setArm(i, Number(slider.value)));
    const value = document.createElement("span");
    value.className = "slider-value";
    slider.addEventListener("input", () => (value.textContent = Number(slider.value).toFixed(2)));
    value.textContent = j.default.toFixed(2);
    row.append(name, slider, value);
    armBox.append(row);
  });
}

function buildGripButtons(): void {
  gripBox.innerHTML = "";
  for (const preset of GRIP_PRESETS) {
    const btn = document.createElement("button");
    btn.textContent = preset.name;
    btn.addEventListener("click", () => cmdState.setGrip(preset.curl));
    gripBox.append(btn);
  }
}

function connect(): void {
  socket = new WebSocket(wsUrl());
  setBanner("connecting…", "warn");

  socket.onopen = () => {
    connected = true;
  };
  socket.onclose = () => {
    connected = false;
    setBanner("disconnected — robot holds failsafe (velocities decay to zero)", "bad");
    setTimeout(connect, 1000);
  };
  socket.onmessage = (ev) => {
    const msg = parseServerMessage(ev.data);
    if (!msg) return;
    if (msg.type === "hello") {
      cmdState.applyHello(msg);
      view.setHello(msg);
      buildArmSliders(msg);
      setBanner(`connected to ${msg.robot} (injected latency ${msg.latency_ms.toFixed(0)} ms)`, "ok");
    } else if (msg.type === "echo") {
      latency.onEcho(msg.t_client, performance.now());
    } else if (msg.type === "state") {
      lastState = msg;
      recordBtn.textContent = msg.record.active ? "stop recording" : "start recording";
      recordInfo.textContent = msg.record.active
        ? `recording: ${msg.record.ticks} ticks`
        : msg.record.path
          ? `saved: ${msg.record.path}`
          : "";
      if (msg.terminated && msg.reason) setBanner(`episode reset (${msg.reason})`, "warn");
    }
  };
}

recordBtn.addEventListener("click", () => {
  const active = lastState?.record.active ?? false;
  socket?.send(JSON.stringify({ type: "record", active: !active }));
});

document.addEventListener("keydown", (ev) => {
  if (ev.target instanceof HTMLInputElement) return;
  input = keyEvent(input, ev.key, true);
});
document.addEventListener("keyup", (ev) => {
  input = keyEvent(input, ev.key, false);
});

function pollGamepad(): void {
  const pads = navigator.getGamepads?.() ?? [];
  const pad = pads.find((p) => p != null);
  if (pad) {
    input = applyGamepad(input, { axes: pad.axes, buttons: pad.buttons.map((b) => b.value) });
  }
}

// Command stream at the streamer's rate; state snapshot per send.
setInterval(() => {
  pollGamepad();
  cmdState.travel = input.travel;
  cmdState.toggles = input.toggles;
  const [recordHit, next] = consumeRecordPress(input);
  input = next;
  if (recordHit) recordBtn.click();

  pedalBars.velocity.value = input.travel.velocity;
  pedalBars.turn.value = input.travel.turn;
  pedalBars.height.value = input.travel.height;
  toggleLabels.forward.textContent = input.toggles.forward ? "forward" : "backward";
  toggleLabels.left.textContent = input.toggles.left ? "left" : "right";

  if (connected && socket?.readyState === WebSocket.OPEN && cmdState.ready) {
    socket.send(JSON.stringify(streamer.snapshot(cmdState, performance.now())));
  }
}, streamer.intervalMs);

// Render loop.
function render(): void {
  view.render(lastState, latency.displayMs, connected);
  requestAnimationFrame(render);
}

buildGripButtons();
connect();
render();

const help = el<HTMLDivElement>("help");
help.textContent =
  `keys: ${DEFAULT_BINDINGS.velocity.toUpperCase()} drive, ` +
  `${DEFAULT_BINDINGS.turn.toUpperCase()} turn, ${DEFAULT_BINDINGS.height.toUpperCase()} squat, ` +
  `${DEFAULT_BINDINGS.directionToggle.toUpperCase()} fwd/back, ` +
  `${DEFAULT_BINDINGS.turnToggle.toUpperCase()} left/right, SPACE record — or use a gamepad`;
