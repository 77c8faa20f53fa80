// Round-trip latency from echo timestamps: the gateway returns each
// command's t_client after its injected cockpit->robot delay, so
// now - t_client measures the full loop. An exponential moving average
// smooths event-loop jitter without hiding level shifts.

export class LatencyTracker {
  private ema: number | null = null;
  private last: number | null = null;

  constructor(private readonly alpha: number = 0.2) {}

  onEcho(tClientEcho: number, now: number): number {
    const rtt = Math.max(now - tClientEcho, 0);
    this.last = rtt;
    this.ema = this.ema === null ? rtt : this.ema + this.alpha * (rtt - this.ema);
    return rtt;
  }

  get displayMs(): number | null {
    return this.ema;
  }

  get lastMs(): number | null {
    return this.last;
  }
}
