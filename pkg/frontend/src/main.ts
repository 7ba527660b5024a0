import { Client, ConflictError, ApiError } from "./api.js";
import { bounds, polygonProblem, type Point } from "./geometry.js";
import { drawScene, SET_COLORS, type Scene } from "./render.js";
import type { AttributeBalance, RegionRecord, SetLabel, StatsDone, StatsResponse } from "./types.js";
import { fitView, pan, screenToWorld, zoomAt, type ViewTransform } from "./view.js";

const TARGETS: { [label: string]: number } = { train: 0.7, val: 0.15, test: 0.15 };

const client = new Client("");

const el = {
  mapSelect: document.getElementById("map-select") as HTMLSelectElement,
  canvas: document.getElementById("map-canvas") as HTMLCanvasElement,
  drawToggle: document.getElementById("draw-toggle") as HTMLButtonElement,
  setSelect: document.getElementById("set-select") as HTMLSelectElement,
  nameInput: document.getElementById("region-name") as HTMLInputElement,
  commit: document.getElementById("commit-region") as HTMLButtonElement,
  undo: document.getElementById("undo-vertex") as HTMLButtonElement,
  cancel: document.getElementById("cancel-draft") as HTMLButtonElement,
  draftStatus: document.getElementById("draft-status") as HTMLSpanElement,
  regionList: document.getElementById("region-list") as HTMLUListElement,
  stats: document.getElementById("stats-body") as HTMLDivElement,
  statsState: document.getElementById("stats-state") as HTMLSpanElement,
  exportBtn: document.getElementById("export-btn") as HTMLButtonElement,
  exportDir: document.getElementById("export-dir") as HTMLInputElement,
  message: document.getElementById("message") as HTMLDivElement,
};

interface AppState {
  revision: number;
  mapId: string;
  regions: RegionRecord[];
  scene: Scene;
  view: ViewTransform;
  drawing: boolean;
  shownStats: StatsDone | null;
  statsPending: boolean;
  regionCounter: number;
}

const state: AppState = {
  revision: 0,
  mapId: "",
  regions: [],
  scene: { samples: [], regions: [], mapId: "", draft: [], draftSet: "train", cursor: null },
  view: { scale: 1, offsetX: 0, offsetY: 0 },
  drawing: false,
  shownStats: null,
  statsPending: false,
  regionCounter: 1,
};

function ctx(): CanvasRenderingContext2D {
  const context = el.canvas.getContext("2d");
  if (!context) throw new Error("canvas 2d context unavailable");
  return context;
}

function redraw(): void {
  state.scene.regions = state.regions;
  state.scene.mapId = state.mapId;
  state.scene.draftSet = el.setSelect.value;
  drawScene(el.canvas, ctx(), state.view, state.scene);
}

function notify(text: string, isError = false): void {
  el.message.textContent = text;
  el.message.className = isError ? "message error" : "message";
}

async function refreshSamples(fit = false): Promise<void> {
  const view = await client.samples(state.mapId, 5000);
  state.scene.samples = view.samples;
  if (fit) {
    const box = bounds(view.samples);
    if (box) state.view = fitView(box, el.canvas.width, el.canvas.height);
  }
  redraw();
}

// ---------------------------------------------------------------------------
// Stats panel: every number comes from /api/stats for a specific revision.

async function pollStats(revision: number): Promise<void> {
  state.statsPending = true;
  renderStats();
  let stats: StatsResponse;
  try {
    stats = await client.waitStats(revision);
  } catch (err) {
    state.statsPending = false;
    notify(`stats request failed: ${(err as Error).message}`, true);
    return;
  }
  if (stats.state === "done" && stats.revision >= (state.shownStats?.revision ?? -1)) {
    state.shownStats = stats;
  }
  state.statsPending = stats.state === "pending";
  renderStats();
}

function pct(value: number | null | undefined): string {
  return value === null || value === undefined ? "n/a" : `${(value * 100).toFixed(1)}%`;
}

function balanceRows(attr: AttributeBalance): string {
  const rows: string[] = [];
  for (const [value, groups] of Object.entries(attr.ratios)) {
    const bars = (["train", "val", "test"] as SetLabel[])
      .map((set) => {
        const ratio = groups[set];
        const width = ratio === null || ratio === undefined ? 0 : ratio * 100;
        return `<div class="bar-line"><span class="bar-tag" style="color:${SET_COLORS[set]}">${set}</span>` +
          `<div class="bar-track"><div class="bar-fill" style="width:${width}%;background:${SET_COLORS[set]}"></div>` +
          fullMarker(groups["full"]) + `</div><span class="bar-val">${pct(ratio)}</span></div>`;
      })
      .join("");
    rows.push(`<div class="balance-value"><div class="balance-name">${attr.key} = ${value}` +
      ` <span class="muted">(full ${pct(groups["full"])})</span></div>${bars}</div>`);
  }
  return rows.join("");
}

function fullMarker(full: number | null | undefined): string {
  if (full === null || full === undefined) return "";
  return `<div class="bar-marker" style="left:${full * 100}%"></div>`;
}

function renderStats(): void {
  el.statsState.textContent = state.statsPending ? "updating…" : `revision ${state.shownStats?.revision ?? 0}`;
  el.statsState.className = state.statsPending ? "stats-state pending" : "stats-state";
  const stats = state.shownStats;
  if (!stats) {
    el.stats.innerHTML = '<p class="muted">no statistics yet</p>';
    return;
  }
  const stale = state.statsPending ? " stale" : "";
  const proportionRows = (["train", "val", "test"] as SetLabel[])
    .map((set) => {
      const p = stats.proportions[set] ?? 0;
      const target = TARGETS[set];
      const delta = p - target;
      const deltaText = `${delta >= 0 ? "+" : ""}${(delta * 100).toFixed(1)}`;
      return `<div class="bar-line"><span class="bar-tag" style="color:${SET_COLORS[set]}">${set}</span>` +
        `<div class="bar-track"><div class="bar-fill" style="width:${p * 100}%;background:${SET_COLORS[set]}"></div>` +
        `<div class="bar-marker" style="left:${target * 100}%"></div></div>` +
        `<span class="bar-val">${pct(p)} (${deltaText} vs ${target * 100}%)</span></div>`;
    })
    .join("");
  const leak = stats.leakage_at_5m;
  const leakText = leak
    ? `val ${pct(leak.val)}, test ${pct(leak.test)}`
    : "n/a (no training samples)";
  const balance = stats.balance.attributes.length
    ? stats.balance.attributes.map(balanceRows).join("")
    : '<p class="muted">no attributes in this dataset</p>';
  el.stats.innerHTML =
    `<div class="stats-block${stale}">` +
    `<h3>Set proportions</h3>${proportionRows}` +
    `<h3>Overlap within 5 m</h3><p>${leakText}</p>` +
    `<h3>Cut sequences</h3><p>${stats.cut_sequences}</p>` +
    `<h3>Attribute balance <span class="muted">(dashed line = full dataset)</span></h3>${balance}` +
    `</div>`;
}

// ---------------------------------------------------------------------------
// Regions

function renderRegionList(): void {
  el.regionList.innerHTML = "";
  for (const region of state.regions) {
    const item = document.createElement("li");
    const swatch = `<span class="swatch" style="background:${SET_COLORS[region.set]}"></span>`;
    item.innerHTML = `${swatch}${region.name} <span class="muted">${region.map_id} · ${region.set} · p${region.priority}</span>`;
    const del = document.createElement("button");
    del.textContent = "delete";
    del.addEventListener("click", () => void deleteRegion(region.name));
    item.appendChild(del);
    el.regionList.appendChild(item);
  }
}

async function pushRegions(regions: RegionRecord[]): Promise<boolean> {
  try {
    const result = await client.putRegions(state.revision, regions);
    state.revision = result.revision;
    state.regions = regions;
    renderRegionList();
    await refreshSamples();
    void pollStats(state.revision);
    return true;
  } catch (err) {
    if (err instanceof ConflictError) {
      notify("someone else edited this project; reloading regions", true);
      if (window.confirm("Region set changed on the server. Reload it?")) {
        await reloadRegions();
      }
    } else if (err instanceof ApiError) {
      notify(`rejected: ${err.message}`, true);
    } else {
      notify(`request failed: ${(err as Error).message}`, true);
    }
    return false;
  }
}

async function reloadRegions(): Promise<void> {
  const view = await client.regions();
  state.revision = view.revision;
  state.regions = view.regions;
  renderRegionList();
  await refreshSamples();
  void pollStats(state.revision);
}

function nextPriority(mapId: string): number {
  const used = state.regions.filter((r) => r.map_id === mapId).map((r) => r.priority);
  return used.length ? Math.max(...used) + 1 : 1;
}

async function commitDraft(): Promise<void> {
  const draft = state.scene.draft;
  const problem = polygonProblem(draft);
  if (problem) {
    notify(`invalid polygon: ${problem}`, true);
    return;
  }
  const name = el.nameInput.value.trim() || `region-${state.regionCounter}`;
  if (state.regions.some((r) => r.name === name)) {
    notify(`region name '${name}' already exists`, true);
    return;
  }
  const record: RegionRecord = {
    name,
    map_id: state.mapId,
    set: el.setSelect.value as SetLabel,
    priority: nextPriority(state.mapId),
    polygon: draft.map(([x, y]) => [x, y]),
  };
  if (await pushRegions([...state.regions, record])) {
    state.regionCounter += 1;
    state.scene.draft = [];
    el.nameInput.value = "";
    notify(`committed ${name} (${record.set})`);
    redraw();
  }
}

async function deleteRegion(name: string): Promise<void> {
  const remaining = state.regions.filter((r) => r.name !== name);
  if (await pushRegions(remaining)) notify(`deleted ${name}`);
}

function updateDraftStatus(): void {
  const n = state.scene.draft.length;
  if (!state.drawing) {
    el.draftStatus.textContent = "";
  } else if (n === 0) {
    el.draftStatus.textContent = "click to place vertices";
  } else {
    const problem = polygonProblem(state.scene.draft);
    el.draftStatus.textContent = `${n} vertices` + (n >= 3 && !problem ? " (ready)" : "");
  }
}

// ---------------------------------------------------------------------------
// Canvas interaction

function canvasPos(event: MouseEvent): [number, number] {
  const rect = el.canvas.getBoundingClientRect();
  return [event.clientX - rect.left, event.clientY - rect.top];
}

function setupCanvas(): void {
  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  let moved = false;

  el.canvas.addEventListener("mousedown", (event) => {
    dragging = true;
    moved = false;
    [lastX, lastY] = canvasPos(event);
  });
  window.addEventListener("mouseup", () => {
    dragging = false;
  });
  el.canvas.addEventListener("mousemove", (event) => {
    const [px, py] = canvasPos(event);
    if (dragging && !state.drawing) {
      state.view = pan(state.view, px - lastX, py - lastY);
      [lastX, lastY] = [px, py];
      moved = true;
      redraw();
      return;
    }
    if (state.drawing && state.scene.draft.length > 0) {
      state.scene.cursor = screenToWorld(state.view, px, py);
      redraw();
    }
  });
  el.canvas.addEventListener("click", (event) => {
    if (!state.drawing || moved) return;
    const [px, py] = canvasPos(event);
    state.scene.draft.push(screenToWorld(state.view, px, py) as Point);
    updateDraftStatus();
    redraw();
  });
  el.canvas.addEventListener("wheel", (event) => {
    event.preventDefault();
    const [px, py] = canvasPos(event);
    state.view = zoomAt(state.view, px, py, event.deltaY < 0 ? 1.2 : 1 / 1.2);
    redraw();
  }, { passive: false });
  window.addEventListener("keydown", (event) => {
    if (event.key === "Escape") {
      state.scene.draft = [];
      state.scene.cursor = null;
      updateDraftStatus();
      redraw();
    }
  });
}

// ---------------------------------------------------------------------------
// Wiring

async function init(): Promise<void> {
  const info = await client.project();
  document.title = `geosplit – ${info.name}`;
  for (const mapId of info.maps) {
    const option = document.createElement("option");
    option.value = mapId;
    option.textContent = mapId;
    el.mapSelect.appendChild(option);
  }
  state.mapId = info.maps[0] ?? "";
  const regions = await client.regions();
  state.revision = regions.revision;
  state.regions = regions.regions;
  renderRegionList();
  await refreshSamples(true);
  void pollStats(state.revision);

  el.mapSelect.addEventListener("change", async () => {
    state.mapId = el.mapSelect.value;
    state.scene.draft = [];
    await refreshSamples(true);
  });
  el.drawToggle.addEventListener("click", () => {
    state.drawing = !state.drawing;
    el.drawToggle.textContent = state.drawing ? "✏ drawing (click to pan)" : "✋ panning (click to draw)";
    el.canvas.style.cursor = state.drawing ? "crosshair" : "grab";
    state.scene.cursor = null;
    updateDraftStatus();
    redraw();
  });
  el.commit.addEventListener("click", () => void commitDraft());
  el.undo.addEventListener("click", () => {
    state.scene.draft.pop();
    updateDraftStatus();
    redraw();
  });
  el.cancel.addEventListener("click", () => {
    state.scene.draft = [];
    state.scene.cursor = null;
    updateDraftStatus();
    redraw();
  });
  el.exportBtn.addEventListener("click", async () => {
    const outDir = el.exportDir.value.trim();
    if (!outDir) {
      notify("enter an output directory for the export", true);
      return;
    }
    try {
      const result = await client.export(outDir);
      notify(`exported ${result.files.join(", ")} to ${result.out_dir}`);
    } catch (err) {
      notify(`export failed: ${(err as Error).message}`, true);
    }
  });
  setupCanvas();
  notify(`loaded ${info.sample_count} samples over ${info.maps.length} maps`);
}

void init();
