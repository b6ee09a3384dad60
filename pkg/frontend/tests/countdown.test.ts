import { describe, expect, it } from "vitest";

import { CountdownModel, formatClock } from "../src/countdown.js";

describe("countdown display", () => {
  it("formats mm:ss", () => {
    expect(formatClock(90)).toBe("01:30");
    expect(formatClock(0)).toBe("00:00");
    expect(formatClock(5)).toBe("00:05");
    expect(formatClock(3600)).toBe("60:00");
    expect(formatClock(59.9)).toBe("00:59");
  });

  it("never goes negative", () => {
    expect(formatClock(-10)).toBe("00:00");
    const model = new CountdownModel(2);
    model.tick(5);
    expect(model.remainingSeconds()).toBe(0);
  });
});

describe("server authority", () => {
  it("resync overrides the local timer in both directions", () => {
    const model = new CountdownModel(65);
    model.tick(0); // local says 65
    model.resync(60); // server shrinks it
    expect(model.remainingSeconds()).toBe(60);
    model.tick(30); // local drift down to 30
    model.resync(45); // server grows it back
    expect(model.remainingSeconds()).toBe(45);
    expect(model.display()).toBe("00:45");
  });

  it("fires the expiry callback once, at zero, from tick or resync", () => {
    let fired = 0;
    const a = new CountdownModel(2);
    a.onExpired(() => fired++);
    a.tick();
    a.tick();
    a.tick();
    expect(fired).toBe(1);

    let viaResync = 0;
    const b = new CountdownModel(100);
    b.onExpired(() => viaResync++);
    b.resync(0);
    b.resync(0);
    expect(viaResync).toBe(1);
  });
});
