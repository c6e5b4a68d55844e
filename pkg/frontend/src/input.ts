// Keyboard / gamepad state to teleop wire messages.
//
// The console itself applies no rate shaping or safety logic beyond the
// fixed-rate heartbeat; the simulator's deadman handling is authoritative.

import { TeleopMessage } from "./protocol.js";

export const HEARTBEAT_MS = 50; // 20 Hz

export interface PadSnapshot {
  axes: number[];
  buttons: { pressed: boolean; value: number }[];
}

export interface Axes {
  forward: number;
  turn: number;
  deadman: boolean;
}

const FORWARD_KEYS = ["KeyW", "ArrowUp"];
const BACKWARD_KEYS = ["KeyS", "ArrowDown"];
const LEFT_KEYS = ["KeyA", "ArrowLeft"];
const RIGHT_KEYS = ["KeyD", "ArrowRight"];
const DEADMAN_KEY = "Space";

const DEADZONE = 0.12;

function anyHeld(keys: ReadonlySet<string>, codes: string[]): boolean {
  return codes.some((c) => keys.has(c));
}

function shaped(v: number): number {
  return Math.abs(v) < DEADZONE ? 0 : Math.max(-1, Math.min(1, v));
}

/** Current drive axes. A gamepad that is actually being used wins over the
 * keyboard; otherwise keys drive. Opposed keys cancel to zero. */
export function readAxes(keys: ReadonlySet<string>, pad: PadSnapshot | null): Axes {
  if (pad) {
    const fwd = shaped(-(pad.axes[1] ?? 0)); // stick up is negative
    const turn = shaped(-(pad.axes[0] ?? 0)); // stick right is positive, turn right is negative
    const trigger =
      (pad.buttons[7]?.pressed || pad.buttons[6]?.pressed) ?? false;
    if (fwd !== 0 || turn !== 0 || trigger) {
      return { forward: fwd, turn, deadman: trigger };
    }
  }
  const fwd =
    (anyHeld(keys, FORWARD_KEYS) ? 1 : 0) - (anyHeld(keys, BACKWARD_KEYS) ? 1 : 0);
  const turn =
    (anyHeld(keys, LEFT_KEYS) ? 1 : 0) - (anyHeld(keys, RIGHT_KEYS) ? 1 : 0);
  return { forward: fwd, turn, deadman: keys.has(DEADMAN_KEY) };
}

export function teleopMessage(
  axes: Axes,
  gainStep: "none" | "up" | "down" = "none",
): TeleopMessage {
  return {
    type: "teleop",
    axis_forward: axes.forward,
    axis_turn: axes.turn,
    deadman: axes.deadman,
    gain_step: gainStep,
  };
}

/** Fixed-cadence command pump. Emits every HEARTBEAT_MS whether or not the
 * input changed, so the server sees a live operator; returns a stop fn. */
export function startHeartbeat(
  send: () => void,
  intervalMs: number = HEARTBEAT_MS,
): () => void {
  const id = setInterval(send, intervalMs);
  return () => clearInterval(id);
}
