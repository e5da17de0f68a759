import { describe, expect, it } from "vitest";

import { decodePfm } from "../src/pfm.js";
import { buildPfm } from "./helpers.js";

const ROWS = [
  [0.0, 0.25, 0.5],
  [0.75, 1.0, -2.5],
];

describe("decodePfm", () => {
  it("reads little-endian samples and flips rows to top-down order", () => {
    const map = decodePfm(buildPfm(ROWS));
    expect(map.width).toBe(3);
    expect(map.height).toBe(2);
    expect(Array.from(map.data)).toEqual(ROWS.flat());
  });

  it("reads big-endian samples when the scale token is positive", () => {
    const map = decodePfm(buildPfm(ROWS, { scale: "1.0", littleEndian: false }));
    expect(Array.from(map.data)).toEqual(ROWS.flat());
  });

  it("accepts single-pixel maps", () => {
    const map = decodePfm(buildPfm([[42.5]]));
    expect(map.width).toBe(1);
    expect(map.height).toBe(1);
    expect(map.data[0]).toBeCloseTo(42.5, 6);
  });

  it("rejects the three-channel magic", () => {
    expect(() => decodePfm(buildPfm(ROWS, { magic: "PF" }))).toThrow(/magic/i);
  });

  it("rejects unknown magic tokens", () => {
    expect(() => decodePfm(buildPfm(ROWS, { magic: "P6" }))).toThrow(/magic/i);
  });

  it("rejects non-positive dimensions", () => {
    const bad = new TextEncoder().encode("Pf\n0 2\n-1.0\n");
    expect(() => decodePfm(bad)).toThrow(/dimension/i);
  });

  it("rejects a zero scale", () => {
    const bad = new TextEncoder().encode("Pf\n1 1\n0\n\0\0\0\0");
    expect(() => decodePfm(bad)).toThrow(/scale/i);
  });

  it("rejects truncated headers", () => {
    const bad = new TextEncoder().encode("Pf\n3 2");
    expect(() => decodePfm(bad)).toThrow();
  });

  it("rejects truncated sample data", () => {
    const whole = buildPfm(ROWS);
    expect(() => decodePfm(whole.subarray(0, whole.length - 1))).toThrow(/sample bytes/i);
  });
});
