// Page wiring: socket, input capture, 20 Hz command pump, render loop.

import { HEARTBEAT_MS, PadSnapshot, readAxes, startHeartbeat, teleopMessage } from "./input.js";
import { ModeMessage, parseFrame, RelayMessage } from "./protocol.js";
import { drawField, drawThermal } from "./render.js";
import {
  freshViewModel,
  isStale,
  telemetryToViewModel,
  ViewModel,
} from "./viewmodel.js";

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

const vm: ViewModel = freshViewModel();
let ws: WebSocket | null = null;
let stopHeartbeat: (() => void) | null = null;
let pendingGain: "none" | "up" | "down" = "none";
const keysDown = new Set<string>();

const fieldCanvas = $<HTMLCanvasElement>("field");
const thermalCanvas = $<HTMLCanvasElement>("thermal");
const fieldCtx = fieldCanvas.getContext("2d")!;
const thermalCtx = thermalCanvas.getContext("2d")!;

function connect(): void {
  disconnect();
  const url = $<HTMLInputElement>("url").value.trim();
  vm.connection = "connecting";
  ws = new WebSocket(url);
  ws.onopen = () => {
    vm.connection = "open";
    stopHeartbeat = startHeartbeat(sendTeleop, HEARTBEAT_MS);
  };
  ws.onclose = () => {
    vm.connection = "closed";
    stopHeartbeat?.();
    stopHeartbeat = null;
    ws = null;
  };
  ws.onerror = () => {
    // onclose follows; nothing else to do
  };
  ws.onmessage = (ev) => {
    const msg = parseFrame(String(ev.data));
    if (msg === null) {
      vm.ignoredFrames += 1;
      return;
    }
    telemetryToViewModel(msg, vm, performance.now());
  };
}

function disconnect(): void {
  stopHeartbeat?.();
  stopHeartbeat = null;
  ws?.close();
  ws = null;
  vm.connection = "closed";
}

function send(obj: unknown): void {
  if (ws && ws.readyState === WebSocket.OPEN) {
    ws.send(JSON.stringify(obj));
  }
}

function padSnapshot(): PadSnapshot | null {
  const pads = navigator.getGamepads ? navigator.getGamepads() : [];
  for (const p of pads) {
    if (p && p.connected) {
      return {
        axes: [...p.axes],
        buttons: p.buttons.map((b) => ({ pressed: b.pressed, value: b.value })),
      };
    }
  }
  return null;
}

function sendTeleop(): void {
  const axes = readAxes(keysDown, padSnapshot());
  send(teleopMessage(axes, pendingGain));
  pendingGain = "none";
}

// --- input capture ---------------------------------------------------------

window.addEventListener("keydown", (e) => {
  if (e.repeat) {
    // gain steps are edge-triggered; movement keys are level-sensed
  } else if (e.code === "Equal" || e.code === "NumpadAdd") {
    pendingGain = "up";
  } else if (e.code === "Minus" || e.code === "NumpadSubtract") {
    pendingGain = "down";
  }
  keysDown.add(e.code);
  if (e.code === "Space") e.preventDefault(); // keep the page from scrolling
});
window.addEventListener("keyup", (e) => keysDown.delete(e.code));
window.addEventListener("blur", () => keysDown.clear());

$<HTMLButtonElement>("connect").addEventListener("click", connect);
$<HTMLButtonElement>("disconnect").addEventListener("click", disconnect);
$<HTMLSelectElement>("mode").addEventListener("change", (e) => {
  const mode = (e.target as HTMLSelectElement).value;
  const msg: ModeMessage = { type: "mode", mode };
  send(msg);
});

// --- panels ------------------------------------------------------------------

function fmt(n: number | undefined, digits = 2): string {
  return n === undefined ? "-" : n.toFixed(digits);
}

function refreshPanels(): void {
  const now = performance.now();
  const stale = isStale(vm, now);
  const status = $<HTMLSpanElement>("status");
  status.textContent = stale ? `${vm.connection} (stale)` : vm.connection;
  status.className = stale || vm.connection !== "open" ? "bad" : "good";
  $("simtime").textContent = `t = ${fmt(vm.simTime, 1)} s`;
  $("ignored").textContent = String(vm.ignoredFrames);

  const pose = vm.pose;
  $("pose").textContent = pose
    ? `x ${fmt(pose.x)}  y ${fmt(pose.y)}  th ${fmt(pose.theta, 3)}  v ${fmt(pose.v)}`
    : "-";

  const vss = vm.vss;
  $("battery").textContent = vss
    ? `${fmt(vss.battery_voltage, 1)} V  (${fmt(vss.state_of_charge * 100, 1)}%)`
    : "-";
  $("power").textContent = vss
    ? `${fmt(vss.power_w, 1)} W   48V ${fmt(vss.bus48_current)} A   12V ${fmt(vss.bus12_current)} A`
    : "-";
  $("climate").textContent = vss
    ? `${fmt(vss.internal_temp_c, 1)} C  ${fmt(vss.internal_humidity_pct, 0)}% RH`
    : "-";
  if (vss) syncRelays(vss.relays);

  $("events").textContent = vm.events
    .slice(-8)
    .map((e) => `${e.t.toFixed(1)}s ${e.name}`)
    .join("\n");
}

const relayBoxes = new Map<string, HTMLInputElement>();

function syncRelays(relays: Record<string, boolean>): void {
  const host = $("relays");
  for (const [name, on] of Object.entries(relays)) {
    let box = relayBoxes.get(name);
    if (!box) {
      const label = document.createElement("label");
      box = document.createElement("input");
      box.type = "checkbox";
      box.addEventListener("change", () => {
        const msg: RelayMessage = { type: "relay", device: name, on: box!.checked };
        send(msg);
      });
      label.appendChild(box);
      label.appendChild(document.createTextNode(" " + name));
      host.appendChild(label);
      relayBoxes.set(name, box);
    }
    // reflect server truth unless the user is mid-click
    if (document.activeElement !== box) box.checked = on;
  }
}

// --- render loop -------------------------------------------------------------

function frame(): void {
  drawField(fieldCtx, vm, 40);
  drawThermal(thermalCtx, vm);
  refreshPanels();
  requestAnimationFrame(frame);
}

requestAnimationFrame(frame);
