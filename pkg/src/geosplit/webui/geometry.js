function orient(a, b, c) {
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}
function onSegment(p, a, b) {
    if (orient(a, b, p) !== 0)
        return false;
    const dot = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1]);
    const len2 = (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2;
    return dot >= 0 && dot <= len2;
}
function segmentsTouch(p1, p2, p3, p4) {
    const d1 = orient(p3, p4, p1);
    const d2 = orient(p3, p4, p2);
    const d3 = orient(p1, p2, p3);
    const d4 = orient(p1, p2, p4);
    if (d1 !== 0 && d2 !== 0 && d3 !== 0 && d4 !== 0 &&
        (d1 > 0) !== (d2 > 0) && (d3 > 0) !== (d4 > 0)) {
        return true;
    }
    return (onSegment(p1, p3, p4) || onSegment(p2, p3, p4) ||
        onSegment(p3, p1, p2) || onSegment(p4, p1, p2));
}
/**
 * Mirror of the server's polygon validation so bad polygons are rejected
 * before a round trip. Returns null when the vertex list is a simple
 * polygon, else a human-readable reason.
 */
export function polygonProblem(vertices) {
    const n = vertices.length;
    if (n < 3)
        return `needs at least 3 vertices, has ${n}`;
    for (let k = 0; k < n; k++) {
        const [x, y] = vertices[k];
        if (!Number.isFinite(x) || !Number.isFinite(y))
            return `vertex ${k} is not finite`;
        const next = vertices[(k + 1) % n];
        if (x === next[0] && y === next[1])
            return `vertices ${k} and ${(k + 1) % n} coincide`;
    }
    for (let k = 0; k < n; k++) {
        const a = vertices[k];
        const b = vertices[(k + 1) % n];
        const c = vertices[(k + 2) % n];
        if (orient(a, b, c) === 0) {
            const dot = (c[0] - b[0]) * (b[0] - a[0]) + (c[1] - b[1]) * (b[1] - a[1]);
            if (dot < 0)
                return `edges around vertex ${(k + 1) % n} fold back`;
        }
    }
    for (let i = 0; i < n; i++) {
        const p1 = vertices[i];
        const p2 = vertices[(i + 1) % n];
        for (let j = i + 1; j < n; j++) {
            if ((i + 1) % n === j || (j + 1) % n === i)
                continue;
            const p3 = vertices[j];
            const p4 = vertices[(j + 1) % n];
            if (segmentsTouch(p1, p2, p3, p4))
                return `edges ${i} and ${j} intersect`;
        }
    }
    return null;
}
/** Even-odd containment with boundary counted inside (matches the server). */
export function pointInPolygon(x, y, vertices) {
    const n = vertices.length;
    for (let k = 0; k < n; k++) {
        if (onSegment([x, y], vertices[k], vertices[(k + 1) % n]))
            return true;
    }
    let inside = false;
    for (let k = 0; k < n; k++) {
        const [ax, ay] = vertices[k];
        const [bx, by] = vertices[(k + 1) % n];
        if ((ay > y) !== (by > y)) {
            const xi = ax + ((y - ay) * (bx - ax)) / (by - ay);
            if (x < xi)
                inside = !inside;
        }
    }
    return inside;
}
export function bounds(points) {
    if (points.length === 0)
        return null;
    let minX = points[0].x;
    let maxX = points[0].x;
    let minY = points[0].y;
    let maxY = points[0].y;
    for (const p of points) {
        if (p.x < minX)
            minX = p.x;
        if (p.x > maxX)
            maxX = p.x;
        if (p.y < minY)
            minY = p.y;
        if (p.y > maxY)
            maxY = p.y;
    }
    return { minX, minY, maxX, maxY };
}
