import type { Point } from "./geometry.js";
import type { RegionRecord, SamplePoint } from "./types.js";
import { worldToScreen, type ViewTransform } from "./view.js";

export const SET_COLORS: { [label: string]: string } = {
  train: "#2a9d3a",
  val: "#f28e2b",
  test: "#d62728",
  unassigned: "#9aa0a6",
};

export interface Scene {
  samples: SamplePoint[];
  regions: RegionRecord[];
  mapId: string;
  draft: Point[];
  draftSet: string;
  cursor: [number, number] | null; // world coords of the pointer while drawing
}

export function drawScene(
  canvas: HTMLCanvasElement,
  ctx: CanvasRenderingContext2D,
  view: ViewTransform,
  scene: Scene,
): void {
  ctx.fillStyle = "#15181c";
  ctx.fillRect(0, 0, canvas.width, canvas.height);

  for (const region of scene.regions) {
    if (region.map_id !== scene.mapId) continue;
    const color = SET_COLORS[region.set] ?? "#ffffff";
    ctx.beginPath();
    region.polygon.forEach(([x, y], i) => {
      const [px, py] = worldToScreen(view, x, y);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.closePath();
    ctx.fillStyle = color + "22";
    ctx.fill();
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.setLineDash([6, 4]);
    ctx.stroke();
    ctx.setLineDash([]);
    const [lx, ly] = worldToScreen(view, region.polygon[0][0], region.polygon[0][1]);
    ctx.fillStyle = color;
    ctx.font = "11px system-ui, sans-serif";
    ctx.fillText(`${region.name} (${region.set}, p${region.priority})`, lx + 4, ly - 4);
  }

  for (const s of scene.samples) {
    const [px, py] = worldToScreen(view, s.x, s.y);
    if (px < -4 || py < -4 || px > canvas.width + 4 || py > canvas.height + 4) continue;
    ctx.fillStyle = SET_COLORS[s.set] ?? "#ffffff";
    ctx.fillRect(px - 1.5, py - 1.5, 3, 3);
  }

  if (scene.draft.length > 0) {
    const color = SET_COLORS[scene.draftSet] ?? "#ffffff";
    ctx.beginPath();
    scene.draft.forEach(([x, y], i) => {
      const [px, py] = worldToScreen(view, x, y);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    if (scene.cursor) {
      const [px, py] = worldToScreen(view, scene.cursor[0], scene.cursor[1]);
      ctx.lineTo(px, py);
    }
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.stroke();
    for (const [x, y] of scene.draft) {
      const [px, py] = worldToScreen(view, x, y);
      ctx.fillStyle = color;
      ctx.beginPath();
      ctx.arc(px, py, 3.5, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
}
