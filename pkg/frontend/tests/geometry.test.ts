import { describe, expect, it } from "vitest";

import { bounds, pointInPolygon, polygonProblem, type Point } from "../src/geometry.js";

const SQUARE: Point[] = [[0, 0], [100, 0], [100, 100], [0, 100]];

describe("polygonProblem", () => {
  it("accepts simple shapes", () => {
    expect(polygonProblem(SQUARE)).toBeNull();
    expect(polygonProblem([[0, 0], [10, 0], [5, 8]])).toBeNull();
    const concave: Point[] = [[0, 0], [30, 0], [30, 20], [20, 20], [20, 10], [10, 10], [10, 20], [0, 20]];
    expect(polygonProblem(concave)).toBeNull();
  });

  it("rejects too-small vertex lists", () => {
    expect(polygonProblem([])).toMatch(/at least 3/);
    expect(polygonProblem([[0, 0], [1, 1]])).toMatch(/at least 3/);
  });

  it("rejects self-intersection", () => {
    expect(polygonProblem([[0, 0], [10, 10], [10, 0], [0, 10]])).toMatch(/intersect/);
  });

  it("rejects duplicate and folded vertices", () => {
    expect(polygonProblem([[0, 0], [0, 0], [10, 0], [10, 10]])).toMatch(/coincide/);
    expect(polygonProblem([[0, 0], [10, 0], [20, 0]])).toMatch(/fold back/);
  });

  it("rejects non-finite vertices", () => {
    expect(polygonProblem([[0, 0], [NaN, 0], [5, 5]])).toMatch(/not finite/);
  });
});

describe("pointInPolygon", () => {
  it("matches the server's edge-inclusive even-odd rule", () => {
    expect(pointInPolygon(50, 50, SQUARE)).toBe(true);
    expect(pointInPolygon(150, 50, SQUARE)).toBe(false);
    expect(pointInPolygon(0, 50, SQUARE)).toBe(true); // edge counts as inside
    expect(pointInPolygon(100, 100, SQUARE)).toBe(true); // vertex too
  });

  it("handles concave notches", () => {
    const u: Point[] = [[0, 0], [30, 0], [30, 20], [20, 20], [20, 10], [10, 10], [10, 20], [0, 20]];
    expect(pointInPolygon(15, 15, u)).toBe(false);
    expect(pointInPolygon(15, 5, u)).toBe(true);
  });
});

describe("bounds", () => {
  it("covers all points", () => {
    const box = bounds([{ x: 3, y: -2 }, { x: -1, y: 7 }, { x: 5, y: 0 }]);
    expect(box).toEqual({ minX: -1, minY: -2, maxX: 5, maxY: 7 });
    expect(bounds([])).toBeNull();
  });
});
