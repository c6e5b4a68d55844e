import { describe, expect, it } from "vitest";

import {
  beamToWorld,
  followViewport,
  screenToWorld,
  Viewport,
  worldToScreen,
} from "../src/transform.js";

const centered: Viewport = {
  scalePxPerM: 50,
  centerPx: { x: 400, y: 300 },
  centerM: { x: 0, y: 0 },
};

describe("worldToScreen", () => {
  it("puts the world origin at the viewport center pixel", () => {
    const p = worldToScreen(centered, { x: 0, y: 0 });
    expect(p).toEqual({ x: 400, y: 300 });
  });

  it("maps +1 m forward to +50 px right, +1 m left to 50 px up", () => {
    expect(worldToScreen(centered, { x: 1, y: 0 })).toEqual({ x: 450, y: 300 });
    expect(worldToScreen(centered, { x: 0, y: 1 })).toEqual({ x: 400, y: 250 });
  });
});

describe("round trip", () => {
  it("screen -> world -> screen stays within half a pixel", () => {
    const vp: Viewport = {
      scalePxPerM: 37.3,
      centerPx: { x: 123.4, y: 567.8 },
      centerM: { x: -4.2, y: 9.1 },
    };
    for (let i = 0; i < 500; i++) {
      const px = { x: Math.sin(i * 12.9898) * 1000, y: Math.cos(i * 78.233) * 800 };
      const back = worldToScreen(vp, screenToWorld(vp, px));
      expect(Math.abs(back.x - px.x)).toBeLessThan(0.5);
      expect(Math.abs(back.y - px.y)).toBeLessThan(0.5);
    }
  });

  it("world -> screen -> world inverts exactly enough for picking", () => {
    const vp = followViewport(860, 520, 40, { x: 12.5, y: -0.3 });
    const w = { x: 14.75, y: 0.6 };
    const back = screenToWorld(vp, worldToScreen(vp, w));
    expect(back.x).toBeCloseTo(w.x, 9);
    expect(back.y).toBeCloseTo(w.y, 9);
  });
});

describe("beamToWorld", () => {
  it("rotates beam angles by the robot heading", () => {
    // facing +y, beam straight ahead at 2 m lands 2 m up
    const pt = beamToWorld({ x: 1, y: 2, theta: Math.PI / 2 }, 0, 2);
    expect(pt.x).toBeCloseTo(1, 12);
    expect(pt.y).toBeCloseTo(4, 12);
  });

  it("a left-pointing beam from an unrotated pose lands at +y", () => {
    const pt = beamToWorld({ x: 0, y: 0, theta: 0 }, Math.PI / 2, 3);
    expect(pt.x).toBeCloseTo(0, 12);
    expect(pt.y).toBeCloseTo(3, 12);
  });
});
