// The server stamps deadlines on its own session clock, so the countdown
// cannot read them against Date.now() directly. Each live tick gives one
// sample of (server time, local time); the smallest observed difference is
// the least-latency estimate of the clock offset, and every deadline is
// mapped through it. Counting down a mapped deadline instead of restarting
// a local timer per tick keeps the display aligned with the server's
// equidistant schedule even when frames arrive jittered.

export class ServerClock {
  private offset: number | null = null; // localMs - serverMs

  sync(serverMs: number, localMs: number): void {
    const o = localMs - serverMs;
    if (this.offset === null || o < this.offset) this.offset = o;
  }

  synced(): boolean {
    return this.offset !== null;
  }

  toLocal(serverMs: number): number | null {
    return this.offset === null ? null : serverMs + this.offset;
  }

  /** Milliseconds until a server-clock deadline; null before the first sync. */
  remainingMs(serverDeadline: number, localNow: number): number | null {
    const local = this.toLocal(serverDeadline);
    return local === null ? null : Math.max(0, local - localNow);
  }
}

export class Countdown {
  private handle: ReturnType<typeof setInterval> | null = null;
  private deadline: number | null = null;

  constructor(
    private el: { textContent: string | null },
    private clock: ServerClock,
    private now: () => number = Date.now,
  ) {}

  /** Point the display at a server-clock deadline (null blanks it). */
  show(serverDeadline: number | null): void {
    this.deadline = serverDeadline;
    this.paint();
    if (this.handle === null && serverDeadline !== null) {
      this.handle = setInterval(() => this.paint(), 100);
    }
    if (serverDeadline === null) this.stop();
  }

  stop(): void {
    if (this.handle !== null) clearInterval(this.handle);
    this.handle = null;
  }

  expired(): boolean {
    if (this.deadline === null) return false;
    const rem = this.clock.remainingMs(this.deadline, this.now());
    return rem !== null && rem <= 0;
  }

  private paint(): void {
    if (this.deadline === null) {
      this.el.textContent = "";
      return;
    }
    const rem = this.clock.remainingMs(this.deadline, this.now());
    this.el.textContent = rem === null ? "…" : (rem / 1000).toFixed(1) + "s";
  }
}
