export function worldToScreen(t, x, y) {
    return [t.offsetX + x * t.scale, t.offsetY - y * t.scale];
}
export function screenToWorld(t, px, py) {
    return [(px - t.offsetX) / t.scale, (t.offsetY - py) / t.scale];
}
/** Fit a world box into a canvas with a margin, preserving aspect. */
export function fitView(box, width, height, margin = 20) {
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
export function zoomAt(t, px, py, factor) {
    const [wx, wy] = screenToWorld(t, px, py);
    const scale = Math.min(Math.max(t.scale * factor, 1e-4), 1e5);
    return {
        scale,
        offsetX: px - wx * scale,
        offsetY: py + wy * scale,
    };
}
export function pan(t, dx, dy) {
    return { scale: t.scale, offsetX: t.offsetX + dx, offsetY: t.offsetY + dy };
}
