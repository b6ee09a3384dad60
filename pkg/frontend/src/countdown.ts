/**
 * Evaluation-test countdown. The local timer is cosmetic; every server view
 * carries the authoritative remaining time and `resync` always wins, even
 * when it moves the display backwards.
 */

export function formatClock(totalSeconds: number): string {
  const clamped = Math.max(0, Math.floor(totalSeconds));
  const minutes = Math.floor(clamped / 60);
  const seconds = clamped % 60;
  const mm = String(minutes).padStart(2, "0");
  const ss = String(seconds).padStart(2, "0");
  return `${mm}:${ss}`;
}

export class CountdownModel {
  private remaining: number;
  private expiredCallback: (() => void) | null = null;
  private fired = false;

  constructor(initialSeconds: number) {
    this.remaining = Math.max(0, initialSeconds);
  }

  onExpired(callback: () => void): void {
    this.expiredCallback = callback;
  }

  /** Server authority: adopt the server's remaining time unconditionally. */
  resync(serverRemainingSeconds: number): void {
    this.remaining = Math.max(0, serverRemainingSeconds);
    this.maybeFire();
  }

  tick(seconds = 1): void {
    this.remaining = Math.max(0, this.remaining - seconds);
    this.maybeFire();
  }

  private maybeFire(): void {
    if (this.remaining <= 0 && !this.fired) {
      this.fired = true;
      this.expiredCallback?.();
    }
  }

  remainingSeconds(): number {
    return this.remaining;
  }

  display(): string {
    return formatClock(this.remaining);
  }
}
