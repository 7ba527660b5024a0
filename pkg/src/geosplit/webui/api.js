export class ConflictError extends Error {
    constructor(detail) {
        super(detail);
        this.name = "ConflictError";
    }
}
export class ApiError extends Error {
    constructor(status, detail) {
        super(`${status}: ${detail}`);
        this.status = status;
        this.name = "ApiError";
    }
}
async function request(base, path, init) {
    const response = await fetch(base + path, init);
    if (!response.ok) {
        let detail = response.statusText;
        try {
            const body = await response.json();
            if (body && typeof body.detail === "string")
                detail = body.detail;
        }
        catch {
            // keep statusText
        }
        if (response.status === 409)
            throw new ConflictError(detail);
        throw new ApiError(response.status, detail);
    }
    return (await response.json());
}
export class Client {
    constructor(base = "") {
        this.base = base;
    }
    project() {
        return request(this.base, "/api/project");
    }
    samples(mapId, maxPoints = 5000) {
        const q = new URLSearchParams({ map_id: mapId, max_points: String(maxPoints) });
        return request(this.base, `/api/samples?${q}`);
    }
    regions() {
        return request(this.base, "/api/regions");
    }
    putRegions(revision, regions) {
        return request(this.base, "/api/regions", {
            method: "PUT",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ revision, regions }),
        });
    }
    stats(revision) {
        return request(this.base, `/api/stats?revision=${revision}`);
    }
    /** Poll until stats for the revision stop being pending. */
    async waitStats(revision, timeoutMs = 30000, intervalMs = 150) {
        const deadline = Date.now() + timeoutMs;
        for (;;) {
            const stats = await this.stats(revision);
            if (stats.state !== "pending" || Date.now() > deadline)
                return stats;
            await new Promise((resolve) => setTimeout(resolve, intervalMs));
        }
    }
    export(outDir, timestamp) {
        const body = { out_dir: outDir };
        if (timestamp !== undefined)
            body.timestamp = timestamp;
        return request(this.base, "/api/export", {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        });
    }
}
