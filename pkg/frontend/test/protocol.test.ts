import { describe, expect, it } from "vitest";

import { KNOWN_TYPES, parseFrame } from "../src/protocol.js";

describe("parseFrame", () => {
  it("passes well-formed telemetry objects through", () => {
    const msg = parseFrame('{"type": "pose", "t": 1.5, "x": 2}');
    expect(msg).not.toBeNull();
    expect(msg!.type).toBe("pose");
  });

  it("returns null for broken JSON", () => {
    expect(parseFrame("{nope")).toBeNull();
    expect(parseFrame("")).toBeNull();
  });

  it("returns null for JSON that is not an object", () => {
    expect(parseFrame("[1, 2]")).toBeNull();
    expect(parseFrame("42")).toBeNull();
    expect(parseFrame("null")).toBeNull();
  });

  it("keeps unknown-typed objects so the caller can count them", () => {
    const msg = parseFrame('{"type": "mystery"}');
    expect(msg).not.toBeNull();
    expect(KNOWN_TYPES.has(String(msg!.type))).toBe(false);
  });
});

describe("KNOWN_TYPES", () => {
  it("matches the service's outbound frame kinds", () => {
    expect([...KNOWN_TYPES].sort()).toEqual([
      "event",
      "pose",
      "scan",
      "thermal",
      "vss",
    ]);
  });
});
