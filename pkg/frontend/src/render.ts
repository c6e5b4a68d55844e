// Canvas painting. Pure consumers of the view model; no state of their own.

import { followViewport, worldToScreen } from "./transform.js";
import { thermalIntensity, ViewModel } from "./viewmodel.js";

const TRACE_COLOR = "#4cc9f0";
const SCAN_COLOR = "#f4a261";
const ROBOT_COLOR = "#e9ecef";
const GRID_COLOR = "#2b2d42";

export function drawField(
  ctx: CanvasRenderingContext2D,
  vm: ViewModel,
  scalePxPerM: number,
): void {
  const w = ctx.canvas.width;
  const h = ctx.canvas.height;
  ctx.fillStyle = "#14151f";
  ctx.fillRect(0, 0, w, h);
  const robot = vm.pose ?? { x: 0, y: 0, theta: 0 };
  const vp = followViewport(w, h, scalePxPerM, robot);

  // meter grid
  ctx.strokeStyle = GRID_COLOR;
  ctx.lineWidth = 1;
  const x0 = Math.floor(robot.x - w / scalePxPerM);
  const x1 = Math.ceil(robot.x + w / scalePxPerM);
  for (let gx = x0; gx <= x1; gx++) {
    const p = worldToScreen(vp, { x: gx, y: 0 });
    ctx.beginPath();
    ctx.moveTo(p.x, 0);
    ctx.lineTo(p.x, h);
    ctx.stroke();
  }
  const y0 = Math.floor(robot.y - h / scalePxPerM);
  const y1 = Math.ceil(robot.y + h / scalePxPerM);
  for (let gy = y0; gy <= y1; gy++) {
    const p = worldToScreen(vp, { x: 0, y: gy });
    ctx.beginPath();
    ctx.moveTo(0, p.y);
    ctx.lineTo(w, p.y);
    ctx.stroke();
  }

  // pose trace
  if (vm.trace.length > 1) {
    ctx.strokeStyle = TRACE_COLOR;
    ctx.lineWidth = 2;
    ctx.beginPath();
    const first = worldToScreen(vp, vm.trace[0]);
    ctx.moveTo(first.x, first.y);
    for (let i = 1; i < vm.trace.length; i++) {
      const p = worldToScreen(vp, vm.trace[i]);
      ctx.lineTo(p.x, p.y);
    }
    ctx.stroke();
  }

  // scan returns
  ctx.fillStyle = SCAN_COLOR;
  for (const pt of vm.scanPoints) {
    const p = worldToScreen(vp, pt);
    ctx.fillRect(p.x - 1.5, p.y - 1.5, 3, 3);
  }

  // robot body with heading tick
  if (vm.pose) {
    const c = worldToScreen(vp, vm.pose);
    const r = 0.5 * scalePxPerM;
    ctx.strokeStyle = ROBOT_COLOR;
    ctx.lineWidth = 2;
    ctx.strokeRect(c.x - r * 0.8, c.y - r, r * 1.6, r * 2);
    const nose = worldToScreen(vp, {
      x: vm.pose.x + 0.6 * Math.cos(vm.pose.theta),
      y: vm.pose.y + 0.6 * Math.sin(vm.pose.theta),
    });
    ctx.beginPath();
    ctx.moveTo(c.x, c.y);
    ctx.lineTo(nose.x, nose.y);
    ctx.stroke();
  }
}

/** Ironbow-ish ramp: cold blue through purple to yellow-white. */
export function heatColor(intensity: number): [number, number, number] {
  const t = Math.max(0, Math.min(1, intensity));
  const r = Math.round(255 * Math.min(1, t * 2.2));
  const g = Math.round(255 * Math.max(0, t * 1.8 - 0.6));
  const b = Math.round(255 * (t < 0.4 ? 0.3 + t : Math.max(0, 1.6 - 2.2 * t)));
  return [r, g, b];
}

export function drawThermal(ctx: CanvasRenderingContext2D, vm: ViewModel): void {
  const w = ctx.canvas.width;
  const h = ctx.canvas.height;
  if (!vm.thermal) {
    ctx.fillStyle = "#14151f";
    ctx.fillRect(0, 0, w, h);
    return;
  }
  const th = vm.thermal;
  const img = ctx.createImageData(th.width, th.height);
  for (let i = 0; i < th.bytes.length; i++) {
    const [r, g, b] = heatColor(thermalIntensity(th.bytes[i], th.minC, th.maxC));
    img.data[i * 4] = r;
    img.data[i * 4 + 1] = g;
    img.data[i * 4 + 2] = b;
    img.data[i * 4 + 3] = 255;
  }
  // paint at native resolution, then stretch onto the visible canvas
  const off = new OffscreenCanvas(th.width, th.height);
  const offCtx = off.getContext("2d")!;
  offCtx.putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, w, h);
}
