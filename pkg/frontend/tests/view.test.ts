import { describe, expect, it } from "vitest";

import { fitView, pan, screenToWorld, worldToScreen, zoomAt } from "../src/view.js";

describe("view transform", () => {
  it("round-trips world and screen coordinates", () => {
    const t = { scale: 2.5, offsetX: 100, offsetY: 300 };
    const [px, py] = worldToScreen(t, 12.5, -4);
    const [wx, wy] = screenToWorld(t, px, py);
    expect(wx).toBeCloseTo(12.5, 12);
    expect(wy).toBeCloseTo(-4, 12);
  });

  it("fits a box inside the canvas with margin", () => {
    const t = fitView({ minX: 0, minY: 0, maxX: 100, maxY: 50 }, 800, 600, 20);
    for (const [x, y] of [[0, 0], [100, 0], [0, 50], [100, 50]] as const) {
      const [px, py] = worldToScreen(t, x, y);
      expect(px).toBeGreaterThanOrEqual(19);
      expect(px).toBeLessThanOrEqual(781);
      expect(py).toBeGreaterThanOrEqual(19);
      expect(py).toBeLessThanOrEqual(581);
    }
  });

  it("keeps y pointing up on screen", () => {
    const t = fitView({ minX: 0, minY: 0, maxX: 10, maxY: 10 }, 100, 100);
    const [, lowY] = worldToScreen(t, 5, 0);
    const [, highY] = worldToScreen(t, 5, 10);
    expect(highY).toBeLessThan(lowY);
  });

  it("zoom keeps the cursor's world point fixed", () => {
    const t = { scale: 3, offsetX: 40, offsetY: 90 };
    const anchor: [number, number] = [123, 45];
    const before = screenToWorld(t, ...anchor);
    const zoomed = zoomAt(t, anchor[0], anchor[1], 1.7);
    const after = screenToWorld(zoomed, ...anchor);
    expect(after[0]).toBeCloseTo(before[0], 9);
    expect(after[1]).toBeCloseTo(before[1], 9);
    expect(zoomed.scale).toBeCloseTo(5.1, 12);
  });

  it("pan shifts by pixels", () => {
    const t = { scale: 2, offsetX: 0, offsetY: 0 };
    const moved = pan(t, 15, -7);
    expect(moved.offsetX).toBe(15);
    expect(moved.offsetY).toBe(-7);
    expect(moved.scale).toBe(2);
  });
});
