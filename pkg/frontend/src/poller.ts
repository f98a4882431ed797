// Repeating fetch with at most one request in flight per view, and enough
// bookkeeping to drive the offline banner / staleness indicator.

export const MAX_INTERVAL_MS = 10_000;

export class Poller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private inFlight = false;
  lastSuccessAt: number | null = null;
  lastError: string | null = null;

  constructor(
    private task: () => Promise<void>,
    private intervalMs: number,
    private onStateChange: () => void = () => {},
  ) {
    this.intervalMs = Math.min(intervalMs, MAX_INTERVAL_MS);
  }

  async tick(): Promise<void> {
    if (this.inFlight) return; // never more than one request in flight
    this.inFlight = true;
    try {
      await this.task();
      this.lastSuccessAt = Date.now();
      this.lastError = null;
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
    } finally {
      this.inFlight = false;
      this.onStateChange();
    }
  }

  start(): void {
    if (this.timer !== null) return;
    void this.tick();
    this.timer = setInterval(() => void this.tick(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  isStale(now: number = Date.now()): boolean {
    if (this.lastSuccessAt === null) return this.lastError !== null;
    return now - this.lastSuccessAt > 2 * this.intervalMs;
  }
}
