// Screen/world mapping. World frame: x along the corridor, y to the robot's
// left, meters. Screen frame: canvas pixels, y growing downward.

export interface Viewport {
  scalePxPerM: number;
  centerPx: { x: number; y: number }; // pixel that shows centerM
  centerM: { x: number; y: number };
}

export interface Pt {
  x: number;
  y: number;
}

export function worldToScreen(vp: Viewport, p: Pt): Pt {
  return {
    x: vp.centerPx.x + (p.x - vp.centerM.x) * vp.scalePxPerM,
    y: vp.centerPx.y - (p.y - vp.centerM.y) * vp.scalePxPerM,
  };
}

export function screenToWorld(vp: Viewport, p: Pt): Pt {
  return {
    x: vp.centerM.x + (p.x - vp.centerPx.x) / vp.scalePxPerM,
    y: vp.centerM.y - (p.y - vp.centerPx.y) / vp.scalePxPerM,
  };
}

/** One lidar return to world coordinates. Beam angles are body-relative. */
export function beamToWorld(
  pose: { x: number; y: number; theta: number },
  angle: number,
  range: number,
): Pt {
  const a = pose.theta + angle;
  return { x: pose.x + range * Math.cos(a), y: pose.y + range * Math.sin(a) };
}

/** Viewport that keeps the robot at a fixed spot on the canvas. */
export function followViewport(
  canvasW: number,
  canvasH: number,
  scalePxPerM: number,
  robot: Pt,
): Viewport {
  return {
    scalePxPerM,
    // robot sits at 30% width so most of the view is the road ahead
    centerPx: { x: canvasW * 0.3, y: canvasH / 2 },
    centerM: { x: robot.x, y: robot.y },
  };
}
