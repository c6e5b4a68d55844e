// Everything the page renders, folded out of the telemetry stream one frame
// at a time. No DOM access here; the render loop reads this and paints.

import {
  EventFrame,
  KNOWN_TYPES,
  PoseFrame,
  ScanFrame,
  ThermalFrame,
  VssFrame,
} from "./protocol.js";
import { beamToWorld, Pt } from "./transform.js";

export const TRACE_CAP = 2000;
export const EVENT_CAP = 50;
export const STALE_AFTER_MS = 1000;

export interface ThermalView {
  width: number;
  height: number;
  bytes: Uint8Array;
  minC: number;
  maxC: number;
}

export interface ViewModel {
  connection: "idle" | "connecting" | "open" | "closed";
  pose: PoseFrame | null;
  trace: Pt[];
  scanPoints: Pt[]; // world coords, returns only
  scanMaxRange: number;
  thermal: ThermalView | null;
  vss: VssFrame | null;
  events: { t: number; name: string }[];
  simTime: number;
  lastFrameAtMs: number;
  ignoredFrames: number;
}

export function freshViewModel(): ViewModel {
  return {
    connection: "idle",
    pose: null,
    trace: [],
    scanPoints: [],
    scanMaxRange: 8,
    thermal: null,
    vss: null,
    events: [],
    simTime: 0,
    lastFrameAtMs: 0,
    ignoredFrames: 0,
  };
}

/** Fold one parsed wire object into the view model. Unknown types leave
 * everything untouched except the ignored counter. */
export function telemetryToViewModel(
  msg: { type?: unknown },
  vm: ViewModel,
  nowMs: number,
): ViewModel {
  if (typeof msg.type !== "string" || !KNOWN_TYPES.has(msg.type)) {
    vm.ignoredFrames += 1;
    return vm;
  }
  vm.lastFrameAtMs = nowMs;
  switch (msg.type) {
    case "pose": {
      const pose = msg as PoseFrame;
      vm.pose = pose;
      vm.simTime = pose.t;
      vm.trace.push({ x: pose.x, y: pose.y });
      if (vm.trace.length > TRACE_CAP) {
        vm.trace.splice(0, vm.trace.length - TRACE_CAP);
      }
      break;
    }
    case "scan": {
      const scan = msg as ScanFrame;
      vm.scanMaxRange = scan.max_range;
      vm.scanPoints = scanToWorldPoints(scan, vm.pose);
      break;
    }
    case "thermal": {
      const th = msg as ThermalFrame;
      vm.thermal = {
        width: th.width,
        height: th.height,
        bytes: decodeB64(th.b64),
        minC: th.min_c,
        maxC: th.max_c,
      };
      break;
    }
    case "vss":
      vm.vss = msg as VssFrame;
      break;
    case "event": {
      const ev = msg as EventFrame;
      vm.events.push({ t: ev.t, name: ev.name });
      if (vm.events.length > EVENT_CAP) {
        vm.events.splice(0, vm.events.length - EVENT_CAP);
      }
      break;
    }
  }
  return vm;
}

/** Polar scan to world points; beams pinned at max range returned nothing. */
export function scanToWorldPoints(
  scan: ScanFrame,
  pose: { x: number; y: number; theta: number } | null,
): Pt[] {
  const origin = pose ?? { x: 0, y: 0, theta: 0 };
  const n = scan.ranges.length;
  if (n === 0) return [];
  const step = (scan.angle_max - scan.angle_min) / n;
  const pts: Pt[] = [];
  for (let i = 0; i < n; i++) {
    const r = scan.ranges[i];
    if (r < scan.max_range) {
      pts.push(beamToWorld(origin, scan.angle_min + i * step, r));
    }
  }
  return pts;
}

/** Normalized [0,1] heat for one thermal byte. A flat frame (min == max)
 * maps to mid-scale rather than dividing by zero. */
export function thermalIntensity(byte: number, minC: number, maxC: number): number {
  if (maxC <= minC) return 0.5;
  return byte / 255;
}

export function isStale(vm: ViewModel, nowMs: number): boolean {
  return vm.lastFrameAtMs > 0 && nowMs - vm.lastFrameAtMs > STALE_AFTER_MS;
}

function decodeB64(b64: string): Uint8Array {
  const bin = atob(b64);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}
