// Fixed-capacity ring buffer rendered as a tiny polyline.

export class Sparkline {
  private values: number[] = [];

  constructor(private readonly capacity = 180) {}

  push(v: number): void {
    this.values.push(v);
    if (this.values.length > this.capacity) this.values.shift();
  }

  data(): readonly number[] {
    return this.values;
  }

  draw(ctx: CanvasRenderingContext2D, x: number, y: number, w: number, h: number, color: string): void {
    const vals = this.values;
    ctx.strokeStyle = "#39424e";
    ctx.strokeRect(x, y, w, h);
    if (vals.length < 2) return;
    const max = Math.max(...vals, 1e-6);
    ctx.beginPath();
    vals.forEach((v, i) => {
      const px = x + (i / (this.capacity - 1)) * w;
      const py = y + h - Math.min(v / max, 1) * h;
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.strokeStyle = color;
    ctx.stroke();
    ctx.fillStyle = "#8a93a0";
    ctx.font = "10px monospace";
    ctx.fillText(max.toPrecision(2), x + w + 4, y + 10);
  }
}
