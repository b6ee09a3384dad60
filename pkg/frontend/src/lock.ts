/**
 * Controller for the locked feedback screen.
 *
 * The continue control is a dumb surface (a button in the real UI, a stub in
 * tests); the controller is the only thing that can mark the screen passed,
 * and it does so exclusively after a successful server acknowledgement. The
 * local countdown is cosmetic: a 425 from the server re-disables the control
 * with the server's remaining time, whatever the local timer believed.
 */

import type { SessionView } from "./api.js";
import { isApiError } from "./api.js";

/** The one server call this controller is allowed to make. */
export interface AckApi {
  acknowledge(sessionId: string): Promise<SessionView>;
}

export interface ContinueControl {
  setDisabled(disabled: boolean): void;
  setRemaining(seconds: number): void;
  showError(message: string): void;
}

export class LockScreenController {
  private remaining: number;
  private pending = false;
  private passed = false;
  private disabled = true;
  private nextView: SessionView | null = null;

  constructor(
    private readonly api: AckApi,
    private readonly sessionId: string,
    lockRemainingSeconds: number,
    private readonly control: ContinueControl,
  ) {
    this.remaining = Math.max(0, lockRemainingSeconds);
    this.applyRemaining();
  }

  private applyRemaining(): void {
    this.disabled = this.remaining > 0 || this.pending || this.passed;
    this.control.setRemaining(this.remaining);
    this.control.setDisabled(this.disabled);
  }

  /** Local one-second tick; never unlocks on its own authority beyond 0. */
  tick(seconds = 1): void {
    if (this.passed) return;
    this.remaining = Math.max(0, this.remaining - seconds);
    this.applyRemaining();
  }

  isDisabled(): boolean {
    return this.disabled;
  }

  hasPassed(): boolean {
    return this.passed;
  }

  /** The view to render next; only present after a successful ack. */
  viewAfterPass(): SessionView | null {
    return this.nextView;
  }

  /**
   * The single path forward. A disabled control is a no-op; a 425 re-locks
   * with the server's remaining time; a network failure keeps the screen
   * locked with a retry affordance.
   */
  async requestContinue(): Promise<boolean> {
    if (this.disabled || this.pending || this.passed) {
      return false;
    }
    this.pending = true;
    this.applyRemaining();
    try {
      const view = await this.api.acknowledge(this.sessionId);
      this.passed = true;
      this.nextView = view;
      this.pending = false;
      this.disabled = true; // the screen is done; the control never re-enables
      this.control.setDisabled(true);
      return true;
    } catch (err) {
      this.pending = false;
      if (isApiError(err) && err.status === 425) {
        const remaining = Number(err.details?.remaining_seconds ?? 1);
        this.remaining = Math.max(remaining, 0.001); // stay locked, trust the server
        this.applyRemaining();
        return false;
      }
      // Network or other failure: the screen has not been passed, but the
      // control re-enables so the student can retry the acknowledgement.
      this.control.showError(isApiError(err) ? err.message : "network error, retry");
      this.remaining = 0;
      this.applyRemaining();
      return false;
    }
  }
}
