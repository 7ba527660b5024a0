import type {
  ExportResult,
  ProjectInfo,
  RegionRecord,
  RegionsView,
  SampleView,
  StatsResponse,
} from "./types.js";

export class ConflictError extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "ConflictError";
  }
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(`${status}: ${detail}`);
    this.name = "ApiError";
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(base + path, init);
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // keep statusText
    }
    if (response.status === 409) throw new ConflictError(detail);
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class Client {
  constructor(private base: string = "") {}

  project(): Promise<ProjectInfo> {
    return request(this.base, "/api/project");
  }

  samples(mapId: string, maxPoints = 5000): Promise<SampleView> {
    const q = new URLSearchParams({ map_id: mapId, max_points: String(maxPoints) });
    return request(this.base, `/api/samples?${q}`);
  }

  regions(): Promise<RegionsView> {
    return request(this.base, "/api/regions");
  }

  putRegions(revision: number, regions: RegionRecord[]): Promise<{ revision: number }> {
    return request(this.base, "/api/regions", {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ revision, regions }),
    });
  }

  stats(revision: number): Promise<StatsResponse> {
    return request(this.base, `/api/stats?revision=${revision}`);
  }

  /** Poll until stats for the revision stop being pending. */
  async waitStats(revision: number, timeoutMs = 30000, intervalMs = 150): Promise<StatsResponse> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const stats = await this.stats(revision);
      if (stats.state !== "pending" || Date.now() > deadline) return stats;
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }

  export(outDir: string, timestamp?: string): Promise<ExportResult> {
    const body: { out_dir: string; timestamp?: string } = { out_dir: outDir };
    if (timestamp !== undefined) body.timestamp = timestamp;
    return request(this.base, "/api/export", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }
}
