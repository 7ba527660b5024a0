/**
 * World-to-screen transform: world y grows upward, canvas y grows downward.
 * scale is pixels per meter; (offsetX, offsetY) is the canvas position of
 * the world origin.
 */
export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function worldToScreen(t: ViewTransform, x: number, y: number): [number, number] {
  return [t.offsetX + x * t.scale, t.offsetY - y * t.scale];
}

export function screenToWorld(t: ViewTransform, px: number, py: number): [number, number] {
  return [(px - t.offsetX) / t.scale, (t.offsetY - py) / t.scale];
}

/** Fit a world box into a canvas with a margin, preserving aspect. */
export function fitView(
  box: { minX: number; minY: number; maxX: number; maxY: number },
  width: number,
  height: number,
  margin = 20,
): ViewTransform {
  const spanX = Math.max(box.maxX - box.minX, 1e-9);
  const spanY = Math.max(box.maxY - box.minY, 1e-9);
  const scale = Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY);
  const cx = (box.minX + box.maxX) / 2;
  const cy = (box.minY + box.maxY) / 2;
  return {
    scale,
    offsetX: width / 2 - cx * scale,
    offsetY: height / 2 + cy * scale,
  };
}

/** Zoom keeping the world point under the cursor fixed. */
export function zoomAt(t: ViewTransform, px: number, py: number, factor: number): ViewTransform {
  const [wx, wy] = screenToWorld(t, px, py);
  const scale = Math.min(Math.max(t.scale * factor, 1e-4), 1e5);
  return {
    scale,
    offsetX: px - wx * scale,
    offsetY: py + wy * scale,
  };
}

export function pan(t: ViewTransform, dx: number, dy: number): ViewTransform {
  return { scale: t.scale, offsetX: t.offsetX + dx, offsetY: t.offsetY + dy };
}
