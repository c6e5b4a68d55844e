// Wire vocabulary of the simulator's telemetry socket. Everything is JSON
// text frames; the server drops anything it does not recognize, and so do we.

export interface PoseFrame {
  type: "pose";
  t: number;
  x: number;
  y: number;
  theta: number;
  v: number;
  omega: number;
}

export interface ScanFrame {
  type: "scan";
  t: number;
  angle_min: number;
  angle_max: number;
  max_range: number;
  ranges: number[];
}

export interface ThermalFrame {
  type: "thermal";
  t: number;
  width: number;
  height: number;
  min_c: number;
  max_c: number;
  b64: string; // row-major uint8, normalized between min_c and max_c
}

export interface VssFrame {
  type: "vss";
  t: number;
  battery_voltage: number;
  state_of_charge: number;
  bus48_current: number;
  bus12_current: number;
  power_w: number;
  relays: Record<string, boolean>;
  internal_temp_c: number;
  internal_humidity_pct: number;
}

export interface EventFrame {
  type: "event";
  t: number;
  name: string;
  [extra: string]: unknown;
}

export type TelemetryFrame =
  | PoseFrame
  | ScanFrame
  | ThermalFrame
  | VssFrame
  | EventFrame;

export interface TeleopMessage {
  type: "teleop";
  axis_forward: number;
  axis_turn: number;
  deadman: boolean;
  gain_step: "none" | "up" | "down";
}

export interface RelayMessage {
  type: "relay";
  device: string;
  on: boolean;
}

export interface ModeMessage {
  type: "mode";
  mode: string;
}

/** Parse one socket message. Returns null for non-JSON or non-object
 * payloads; frames with an unrecognized type still come back (as a generic
 * object) so the view model can count them. */
export function parseFrame(raw: string): { type?: unknown } | null {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof msg !== "object" || msg === null || Array.isArray(msg)) {
    return null;
  }
  return msg as { type?: unknown };
}

export const KNOWN_TYPES = new Set(["pose", "scan", "thermal", "vss", "event"]);
