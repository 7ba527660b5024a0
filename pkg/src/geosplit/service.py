"""Local HTTP API behind the interactive split designer.

One project per process, one human editor: mutations are serialized and
guarded by an optimistic revision check (stale writers get 409). Statistics
are recomputed off the request path after every region change; responses are
tagged with the revision they reflect and a newer revision simply supersedes
older pending work.
"""

from __future__ import annotations

import math
import threading
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.responses import FileResponse

from .errors import InvalidPolygonError
from .ingest import Dataset
from .leakage import EVAL_SETS, SplitAssignment, audit
from .report import export_assignment
from .split import (
    Region,
    RegionSet,
    assign_by_regions,
    balance_report,
    point_in_polygon,
)

_STATS_KEEP = 8


def _regions_from_payload(payload) -> RegionSet:
    if not isinstance(payload, list):
        raise ValueError("regions must be a list")
    regions = []
    for rec in payload:
        try:
            regions.append(Region(
                name=str(rec["name"]),
                map_id=str(rec["map_id"]),
                target_set=str(rec["set"]),
                priority=int(rec["priority"]),
                polygon=tuple((float(x), float(y)) for x, y in rec["polygon"]),
            ))
        except (KeyError, TypeError, ValueError) as e:
            raise ValueError(f"malformed region record: {e}") from None
    rs = RegionSet(regions=tuple(regions))
    rs.validate()
    return rs


class Project:
    """Dataset plus current regions, derived stats, and a revision counter."""

    def __init__(self, ds: Dataset, samples_path, name: str = "project",
                 regions: RegionSet | None = None):
        self.ds = ds
        self.samples_path = Path(samples_path)
        self.name = name
        self.regions = regions if regions is not None else RegionSet(regions=())
        self.revision = 0
        self._lock = threading.Lock()
        self._stats: dict[int, dict] = {}
        self._pending: set[int] = set()
        self._schedule(self.revision, self.regions)

    # -- mutation ----------------------------------------------------------

    def put_regions(self, regions: RegionSet, base_revision: int) -> int:
        with self._lock:
            if base_revision != self.revision:
                raise StaleRevision(self.revision)
            self.revision += 1
            self.regions = regions
            revision = self.revision
        self._schedule(revision, regions)
        return revision

    def snapshot(self) -> tuple[int, RegionSet]:
        """Consistent (revision, regions) pair."""
        with self._lock:
            return self.revision, self.regions

    # -- derived state -----------------------------------------------------

    def _schedule(self, revision: int, regions: RegionSet) -> None:
        with self._lock:
            self._pending.add(revision)
        worker = threading.Thread(target=self._compute, args=(revision, regions), daemon=True)
        worker.start()

    def _compute(self, revision: int, regions: RegionSet) -> None:
        stats = self._stats_for_regions(regions)
        stats["revision"] = revision
        with self._lock:
            self._pending.discard(revision)
            if revision >= self.revision - _STATS_KEEP:
                self._stats[revision] = stats
            for old in [r for r in self._stats if r < self.revision - _STATS_KEEP]:
                del self._stats[old]

    def _stats_for_regions(self, regions: RegionSet) -> dict:
        split, cut = assign_by_regions(self.ds, regions, mode="per_sample")
        counts = split.counts()
        leak = None
        if counts["train"] > 0:
            rep = audit(self.ds, split, [5.0])
            leak = {name: rep.sets[name].ratios[0] for name in EVAL_SETS}
        balance = balance_report(self.ds, split)
        return {
            "state": "done",
            "counts": counts,
            "proportions": split.proportions(),
            "leakage_at_5m": leak,
            "balance": balance.to_json_dict(),
            "cut_sequences": cut.cut_sequences,
        }

    def stats(self, revision: int) -> dict:
        with self._lock:
            if revision > self.revision:
                raise UnknownRevision(self.revision)
            done = self._stats.get(revision)
            if done is not None:
                return done
            if revision in self._pending:
                return {"state": "pending", "revision": revision}
            return {"state": "superseded", "revision": revision,
                    "current_revision": self.revision}

    def wait_stats(self, revision: int, timeout: float = 30.0) -> dict:
        """Block until stats for the revision are done (test convenience)."""
        import time
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            out = self.stats(revision)
            if out["state"] != "pending":
                return out
            time.sleep(0.01)
        return self.stats(revision)

    def sample_view(self, map_id: str, max_points: int) -> dict:
        if map_id not in self.ds.maps:
            raise KeyError(map_id)
        samples = [s for s in self.ds.samples if s.map_id == map_id]
        total = len(samples)
        kept = samples
        if total > max_points:
            xs = [s.x for s in samples]
            ys = [s.y for s in samples]
            x0, x1 = min(xs), max(xs)
            y0, y1 = min(ys), max(ys)
            k = max(1, math.ceil(math.sqrt(max_points)))
            wx = (x1 - x0) / k or 1.0
            wy = (y1 - y0) / k or 1.0
            seen: set[tuple[int, int]] = set()
            kept = []
            for s in samples:  # dataset order: deterministic first-per-cell
                cell = (min(k - 1, int((s.x - x0) / wx)), min(k - 1, int((s.y - y0) / wy)))
                if cell in seen:
                    continue
                seen.add(cell)
                kept.append(s)
            kept = kept[:max_points]
        revision, regions = self.snapshot()
        per_map = regions.by_map().get(map_id, [])
        bboxes = [r.bbox() for r in per_map]

        def label(s):
            for r, (bx0, by0, bx1, by1) in zip(per_map, bboxes):
                if bx0 <= s.x <= bx1 and by0 <= s.y <= by1 and point_in_polygon(s.x, s.y, r.polygon):
                    return r.target_set
            return "unassigned"

        return {
            "map_id": map_id,
            "revision": revision,
            "total": total,
            "returned": len(kept),
            "samples": [{"id": s.id, "x": s.x, "y": s.y, "set": label(s)} for s in kept],
        }


class StaleRevision(Exception):
    def __init__(self, current: int):
        self.current = current


class UnknownRevision(Exception):
    def __init__(self, current: int):
        self.current = current


def create_app(project: Project) -> FastAPI:
    app = FastAPI(title="geosplit split designer", docs_url=None, redoc_url=None)
    webui = Path(__file__).parent / "webui"

    @app.get("/api/project")
    def get_project():
        revision, _ = project.snapshot()
        return {
            "name": project.name,
            "revision": revision,
            "sample_count": len(project.ds),
            "sequence_count": len(project.ds.sequences),
            "maps": sorted(project.ds.maps),
            "attr_keys": project.ds.attr_keys(),
        }

    @app.get("/api/samples")
    def get_samples(map_id: str = Query(...), max_points: int = Query(5000, ge=1)):
        try:
            return project.sample_view(map_id, max_points)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown map '{map_id}'") from None

    @app.get("/api/regions")
    def get_regions():
        revision, regions = project.snapshot()
        return {
            "revision": revision,
            "regions": [
                {"name": r.name, "map_id": r.map_id, "set": r.target_set,
                 "priority": r.priority, "polygon": [[x, y] for x, y in r.polygon]}
                for r in regions.regions
            ],
        }

    @app.put("/api/regions")
    def put_regions(payload: dict = Body(...)):
        if "revision" not in payload or "regions" not in payload:
            raise HTTPException(status_code=400, detail="payload needs 'revision' and 'regions'")
        try:
            regions = _regions_from_payload(payload["regions"])
        except (ValueError, InvalidPolygonError) as e:
            raise HTTPException(status_code=400, detail=str(e)) from None
        try:
            base_revision = int(payload["revision"])
        except (TypeError, ValueError):
            raise HTTPException(status_code=400, detail="revision must be an integer") from None
        try:
            revision = project.put_regions(regions, base_revision)
        except StaleRevision as e:
            raise HTTPException(status_code=409,
                                detail=f"stale revision; current is {e.current}") from None
        return {"revision": revision}

    @app.get("/api/stats")
    def get_stats(revision: int = Query(...)):
        try:
            return project.stats(revision)
        except UnknownRevision as e:
            raise HTTPException(status_code=404,
                                detail=f"revision ahead of current {e.current}") from None

    @app.post("/api/export")
    def post_export(payload: dict = Body(...)):
        out_dir = payload.get("out_dir")
        if not out_dir:
            raise HTTPException(status_code=400, detail="payload needs 'out_dir'")
        revision, regions = project.snapshot()
        split, cut = export_assignment(
            project.ds, regions, out_dir, project.samples_path,
            timestamp=payload.get("timestamp"),
        )
        return {
            "revision": revision,
            "out_dir": str(Path(out_dir)),
            "files": ["regions.json", "split.csv", "cut_report.json", "manifest.json"],
            "counts": split.counts(),
            "cut_sequences": cut.cut_sequences,
        }

    if webui.exists():
        @app.get("/")
        def index():
            return FileResponse(webui / "index.html")

        @app.get("/{asset}")
        def asset_file(asset: str):
            target = webui / asset
            if target.is_file():
                return FileResponse(target)
            raise HTTPException(status_code=404)

    return app


def serve(ds: Dataset, samples_path, host: str = "127.0.0.1", port: int = 8642,
          regions: RegionSet | None = None, name: str = "project") -> None:
    import uvicorn

    project = Project(ds, samples_path, name=name, regions=regions)
    app = create_app(project)
    uvicorn.run(app, host=host, port=port, log_level="warning")
