import { describe, expect, it } from "vitest";

import { resampleValues, strokeToValues } from "../src/resample.js";

describe("resampleValues", () => {
  it("turns a 40-point drawing into exactly 256 values", () => {
    const drawn = Array.from({ length: 40 }, (_, i) => Math.sin(i / 5));
    const out = resampleValues(drawn, 256);
    expect(out).toHaveLength(256);
  });

  it("preserves the endpoints", () => {
    const out = resampleValues([3, 9, 1, 7], 16);
    expect(out[0]).toBe(3);
    expect(out[15]).toBe(7);
  });

  it("is exact on linear input", () => {
    // a straight line resampled stays the same straight line
    const line = [0, 10];
    const out = resampleValues(line, 11);
    out.forEach((v, i) => expect(v).toBeCloseTo(i, 10));
  });

  it("is the identity when lengths match", () => {
    const values = [4, 2, 7, 5, 9];
    expect(resampleValues(values, 5)).toEqual(values);
  });

  it("handles upsampling and downsampling", () => {
    const values = Array.from({ length: 100 }, (_, i) => i % 13);
    expect(resampleValues(values, 7)).toHaveLength(7);
    expect(resampleValues(values, 999)).toHaveLength(999);
  });

  it("interpolates between neighbors only", () => {
    const out = resampleValues([0, 100], 3);
    expect(out).toEqual([0, 50, 100]);
  });

  it("constant stroke gives a constant series", () => {
    expect(resampleValues([5], 4)).toEqual([5, 5, 5, 5]);
  });

  it("rejects empty strokes and non-positive targets", () => {
    expect(() => resampleValues([], 8)).toThrow();
    expect(() => resampleValues([1], 0)).toThrow();
  });
});

describe("strokeToValues", () => {
  it("flips the canvas y axis so up means larger", () => {
    const points = [
      { x: 0, y: 180 },
      { x: 50, y: 20 },
    ];
    const out = strokeToValues(points, 200, 2);
    expect(out[0]).toBe(20);
    expect(out[1]).toBe(180);
    expect(out[1]!).toBeGreaterThan(out[0]!);
  });

  it("meets the request contract for any stroke length", () => {
    for (const strokeLen of [1, 3, 40, 500]) {
      const points = Array.from({ length: strokeLen }, (_, i) => ({
        x: i,
        y: 100 + 40 * Math.sin(i / 3),
      }));
      expect(strokeToValues(points, 200, 256)).toHaveLength(256);
    }
  });
});
