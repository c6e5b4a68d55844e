import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import {
  HEARTBEAT_MS,
  PadSnapshot,
  readAxes,
  startHeartbeat,
  teleopMessage,
} from "../src/input.js";

const noKeys = new Set<string>();

function pad(axes: number[], triggers = false): PadSnapshot {
  const buttons = Array.from({ length: 8 }, () => ({
    pressed: false,
    value: 0,
  }));
  if (triggers) buttons[7] = { pressed: true, value: 1 };
  return { axes, buttons };
}

describe("keyboard axes", () => {
  it("is all zeros with nothing held", () => {
    expect(readAxes(noKeys, null)).toEqual({
      forward: 0,
      turn: 0,
      deadman: false,
    });
  });

  it("drives forward at full scale with W held and spacebar deadman", () => {
    const axes = readAxes(new Set(["KeyW", "Space"]), null);
    expect(axes.forward).toBe(1);
    expect(axes.deadman).toBe(true);
  });

  it("cancels opposed keys to zero", () => {
    expect(readAxes(new Set(["KeyW", "KeyS"]), null).forward).toBe(0);
    expect(readAxes(new Set(["ArrowLeft", "ArrowRight"]), null).turn).toBe(0);
  });

  it("maps left keys to a positive turn axis", () => {
    expect(readAxes(new Set(["KeyA"]), null).turn).toBe(1);
    expect(readAxes(new Set(["ArrowDown"]), null).forward).toBe(-1);
  });
});

describe("gamepad axes", () => {
  it("beats the keyboard while deflected", () => {
    const axes = readAxes(new Set(["KeyW"]), pad([0, -0.8], true));
    expect(axes.forward).toBeCloseTo(0.8, 12);
    expect(axes.deadman).toBe(true);
  });

  it("falls back to keys when the stick is centered and triggers are up", () => {
    const axes = readAxes(new Set(["KeyW", "Space"]), pad([0.02, -0.03]));
    expect(axes.forward).toBe(1);
    expect(axes.deadman).toBe(true);
  });

  it("applies the deadzone to small deflections", () => {
    expect(readAxes(noKeys, pad([0, -0.05], true)).forward).toBe(0);
  });

  it("clamps overscale values", () => {
    expect(readAxes(noKeys, pad([0, -1.5], true)).forward).toBe(1);
  });
});

describe("teleopMessage", () => {
  it("carries the protocol shape", () => {
    expect(teleopMessage({ forward: 1, turn: -0.5, deadman: true }, "up")).toEqual({
      type: "teleop",
      axis_forward: 1,
      axis_turn: -0.5,
      deadman: true,
      gain_step: "up",
    });
  });
});

describe("command heartbeat", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("fires at 20 Hz regardless of input changes", () => {
    const send = vi.fn();
    const stop = startHeartbeat(send);
    vi.advanceTimersByTime(1000);
    expect(send).toHaveBeenCalledTimes(1000 / HEARTBEAT_MS);
    expect(send).toHaveBeenCalledTimes(20);
    stop();
    vi.advanceTimersByTime(500);
    expect(send).toHaveBeenCalledTimes(20);
  });
});
