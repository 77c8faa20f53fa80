// Schematic robot view: articulated stick figure (side + top projections)
// driven entirely by gateway-acknowledged joint state. No physics here; the
// browser renders only what the robot reported.

import { HelloMessage, StateMessage } from "./messages.js";
import { Sparkline } from "./sparkline.js";

export class RobotView {
  private readonly ctx: CanvasRenderingContext2D;
  readonly velErr = new Sparkline();
  readonly heightErr = new Sparkline();
  private hello: HelloMessage | null = null;

  constructor(private readonly canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("no 2d context");
    this.ctx = ctx;
  }

  setHello(hello: HelloMessage): void {
    this.hello = hello;
  }

  render(state: StateMessage | null, latencyMs: number | null, connected: boolean): void {
    const { ctx, canvas } = this;
    ctx.fillStyle = "#11151a";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    if (!state || !this.hello) {
      ctx.fillStyle = "#8a93a0";
      ctx.font = "14px monospace";
      ctx.fillText(connected ? "waiting for state…" : "disconnected", 20, 30);
      return;
    }
    this.velErr.push(Math.abs(state.vx - state.cmd.vx));
    this.heightErr.push(Math.abs(state.height - state.cmd.height));

    this.drawSideView(state, 40, 20, 260, 300);
    this.drawTopView(state, 330, 20, 200, 200);
    this.drawHeightBar(state, 560, 20, 28, 300);
    this.velErr.draw(ctx, 330, 250, 180, 44, "#64d2ff");
    this.heightErr.draw(ctx, 330, 310, 180, 44, "#ffd166");
    ctx.fillStyle = "#8a93a0";
    ctx.font = "10px monospace";
    ctx.fillText("|v - v_cmd|", 330, 246);
    ctx.fillText("|h - h_cmd|", 330, 306);

    ctx.fillStyle = "#e8edf2";
    ctx.font = "12px monospace";
    const lat = latencyMs === null ? "--" : latencyMs.toFixed(1);
    ctx.fillText(`rtt ${lat} ms   reward ${state.reward.toFixed(2)}   t ${state.t.toFixed(2)} s`, 40, 345);
  }

  private drawSideView(s: StateMessage, x: number, y: number, w: number, h: number): void {
    const { ctx } = this;
    const hello = this.hello!;
    const scale = h / 1.4; // meters to pixels
    const groundY = y + h - 10;
    ctx.strokeStyle = "#39424e";
    ctx.beginPath();
    ctx.moveTo(x, groundY);
    ctx.lineTo(x + w, groundY);
    ctx.stroke();

    // q_lower layout per leg: hip_pitch, hip_roll, hip_yaw, knee, ankle_pitch, ankle_roll
    const hip = s.q_lower[0] ?? 0;
    const knee = s.q_lower[3] ?? 0;
    const baseX = x + w * 0.45;
    const baseY = groundY - s.height * scale;

    const t = hello.thigh_len * scale;
    const sh = hello.shank_len * scale;
    const kneeX = baseX + Math.sin(hip) * t;
    const kneeY = baseY + Math.cos(hip) * t;
    const footX = kneeX + Math.sin(hip + knee) * sh;
    const footY = kneeY + Math.cos(hip + knee) * sh;

    ctx.strokeStyle = "#64d2ff";
    ctx.lineWidth = 3;
    ctx.beginPath();
    ctx.moveTo(baseX, baseY);
    ctx.lineTo(kneeX, kneeY);
    ctx.lineTo(footX, footY);
    ctx.stroke();

    // torso with pitch tilt, plus a simple arm from shoulder pitch + elbow
    const torsoLen = 0.35 * scale;
    const topX = baseX + Math.sin(s.pitch) * torsoLen;
    const topY = baseY - Math.cos(s.pitch) * torsoLen;
    ctx.strokeStyle = "#e8edf2";
    ctx.beginPath();
    ctx.moveTo(baseX, baseY);
    ctx.lineTo(topX, topY);
    ctx.stroke();
    ctx.beginPath();
    ctx.arc(topX, topY - 8, 7, 0, Math.PI * 2);
    ctx.stroke();

    // upper vector layout is [waist..., arms(14), hands]; locate the arm block
    const armStart = Math.max(s.q_upper.length - 14 - hello.hand_count, 0);
    const shoulderPitch = s.q_upper[armStart] ?? 0;
    const elbow = s.q_upper[armStart + 3] ?? 0;
    const ua = 0.22 * scale;
    const fa = 0.2 * scale;
    const elbX = topX + Math.sin(shoulderPitch + Math.PI / 2) * ua;
    const elbY = topY + Math.cos(shoulderPitch + Math.PI / 2) * ua;
    ctx.strokeStyle = "#ffd166";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(topX, topY);
    ctx.lineTo(elbX, elbY);
    ctx.lineTo(elbX + Math.sin(shoulderPitch + elbow + Math.PI / 2) * fa, elbY + Math.cos(shoulderPitch + elbow + Math.PI / 2) * fa);
    ctx.stroke();
    ctx.lineWidth = 1;

    // contact markers
    ctx.fillStyle = s.contacts[0] ? "#6ee7a0" : "#39424e";
    ctx.fillRect(footX - 14, groundY + 2, 12, 4);
    ctx.fillStyle = s.contacts[1] ? "#6ee7a0" : "#39424e";
    ctx.fillRect(footX + 2, groundY + 2, 12, 4);
  }

  private drawTopView(s: StateMessage, x: number, y: number, w: number, h: number): void {
    const { ctx } = this;
    const cx = x + w / 2;
    const cy = y + h / 2;
    ctx.strokeStyle = "#39424e";
    ctx.strokeRect(x, y, w, h);
    // accumulated-yaw arrow is not state; show yaw RATE as a needle plus roll bar
    const needle = s.wyaw * 0.8;
    ctx.strokeStyle = "#64d2ff";
    ctx.beginPath();
    ctx.moveTo(cx, cy);
    ctx.lineTo(cx + Math.sin(needle) * 60, cy - Math.cos(needle) * 60);
    ctx.stroke();
    ctx.beginPath();
    ctx.arc(cx, cy, 24, 0, Math.PI * 2);
    ctx.stroke();
    // feet as two pads offset by roll
    ctx.fillStyle = s.contacts[0] ? "#6ee7a0" : "#39424e";
    ctx.fillRect(cx - 22, cy + 34 - s.roll * 40, 14, 26);
    ctx.fillStyle = s.contacts[1] ? "#6ee7a0" : "#39424e";
    ctx.fillRect(cx + 8, cy + 34 + s.roll * 40, 14, 26);
    ctx.fillStyle = "#8a93a0";
    ctx.font = "10px monospace";
    ctx.fillText("top: yaw-rate needle, feet", x + 6, y + h - 6);
  }

  private drawHeightBar(s: StateMessage, x: number, y: number, w: number, h: number): void {
    const { ctx } = this;
    const hello = this.hello!;
    const [lo, hi] = hello.height_range;
    const frac = (v: number) => 1 - Math.min(Math.max((v - lo) / (hi - lo), 0), 1);
    ctx.strokeStyle = "#39424e";
    ctx.strokeRect(x, y, w, h);
    ctx.fillStyle = "#64d2ff";
    ctx.fillRect(x + 2, y + frac(s.height) * (h - 4) + 2, w - 4, 4);
    ctx.fillStyle = "#ffd166";
    ctx.fillRect(x + 2, y + frac(s.cmd.height) * (h - 4) + 2, w - 4, 2);
    ctx.fillStyle = "#8a93a0";
    ctx.font = "10px monospace";
    ctx.fillText("h", x + w / 2 - 3, y + h + 12);
  }
}
