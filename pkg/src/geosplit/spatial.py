"""Uniform-grid spatial index over sample positions.

Distances are planar Euclidean per map frame; queries across maps are
undefined and answer "no neighbor". The bucket size is a performance knob
only: the expanding ring search is exact regardless (it stops only once the
best distance found is provably at most the minimum distance any unscanned
ring could contain).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import UnknownMapError, UnknownSampleIdError
from .ingest import Dataset, Sample

DEFAULT_INDEX_CELL = 50.0
DEFAULT_ANALYSIS_CELL = 60.0


def cell_of(x: float, y: float, cell_size: float) -> tuple[int, int]:
    # Mathematical floor anchors cells at the map origin for negative coords too.
    return (math.floor(x / cell_size), math.floor(y / cell_size))


@dataclass(frozen=True)
class SpatialIndex:
    cell_size: float
    # map_id -> {(i, j) -> list of (x, y)}
    buckets: dict[str, dict[tuple[int, int], list[tuple[float, float]]]]
    # map_id -> (min_i, max_i, min_j, max_j) over non-empty buckets
    bounds: dict[str, tuple[int, int, int, int]]


def build_index(ds: Dataset, subset: set[str] | None = None,
                cell_size: float = DEFAULT_INDEX_CELL) -> SpatialIndex:
    """Index the given subset of sample ids (all samples when None)."""
    if cell_size <= 0:
        raise ValueError("cell_size must be > 0")
    if subset is not None:
        known = {s.id for s in ds.samples}
        for sid in subset:
            if sid not in known:
                raise UnknownSampleIdError(sid)
    buckets: dict[str, dict[tuple[int, int], list[tuple[float, float]]]] = {}
    bounds: dict[str, tuple[int, int, int, int]] = {}
    for s in ds.samples:
        if subset is not None and s.id not in subset:
            continue
        cell = cell_of(s.x, s.y, cell_size)
        buckets.setdefault(s.map_id, {}).setdefault(cell, []).append((s.x, s.y))
        i, j = cell
        b = bounds.get(s.map_id)
        if b is None:
            bounds[s.map_id] = (i, i, j, j)
        else:
            bounds[s.map_id] = (min(b[0], i), max(b[1], i), min(b[2], j), max(b[3], j))
    return SpatialIndex(cell_size=cell_size, buckets=buckets, bounds=bounds)


def _ring_cells(qi: int, qj: int, r: int):
    if r == 0:
        yield (qi, qj)
        return
    for di in range(-r, r + 1):
        yield (qi + di, qj - r)
        yield (qi + di, qj + r)
    for dj in range(-r + 1, r):
        yield (qi - r, qj + dj)
        yield (qi + r, qj + dj)


def nearest_distance_xy(idx: SpatialIndex, map_id: str, x: float, y: float) -> float | None:
    """Exact distance to the closest indexed sample on the same map, or None."""
    per_map = idx.buckets.get(map_id)
    if not per_map:
        return None
    cs = idx.cell_size
    qi, qj = cell_of(x, y, cs)
    min_i, max_i, min_j, max_j = idx.bounds[map_id]

    # Rings closer than the bounding box of non-empty buckets are empty.
    di0 = max(0, min_i - qi, qi - max_i)
    dj0 = max(0, min_j - qj, qj - max_j)
    r0 = max(di0, dj0)
    r_max = max(max(abs(qi - min_i), abs(max_i - qi)), max(abs(qj - min_j), abs(max_j - qj)))

    best = math.inf
    r = r0
    while r <= r_max:
        if r > 0 and best <= ((r - 1) * cs) ** 2:
            break
        for cell in _ring_cells(qi, qj, r):
            i, j = cell
            if i < min_i or i > max_i or j < min_j or j > max_j:
                continue
            pts = per_map.get(cell)
            if not pts:
                continue
            for sx, sy in pts:
                dx = sx - x
                dy = sy - y
                d2 = dx * dx + dy * dy
                if d2 < best:
                    best = d2
        r += 1
    return math.sqrt(best) if best < math.inf else None


def nearest_distance(idx: SpatialIndex, query: Sample) -> float | None:
    return nearest_distance_xy(idx, query.map_id, query.x, query.y)


@dataclass(frozen=True)
class CellHistogram:
    cell_size: float
    # map_id -> {(i, j) -> sample count}
    counts: dict[str, dict[tuple[int, int], int]]

    def marginal(self) -> dict[int, int]:
        """Distribution of per-cell sample counts over all maps: count -> cells."""
        out: dict[int, int] = {}
        for per_map in self.counts.values():
            for c in per_map.values():
                out[c] = out.get(c, 0) + 1
        return dict(sorted(out.items()))

    def total(self) -> int:
        return sum(c for per_map in self.counts.values() for c in per_map.values())

    def non_empty_cells(self) -> int:
        return sum(len(per_map) for per_map in self.counts.values())

    def to_json_dict(self) -> dict:
        return {
            "cell_size": self.cell_size,
            "total_samples": self.total(),
            "non_empty_cells": self.non_empty_cells(),
            "marginal": [[k, v] for k, v in self.marginal().items()],
            "maps": {
                m: {
                    "samples": sum(per_map.values()),
                    "cells": len(per_map),
                    "max_count": max(per_map.values()),
                }
                for m, per_map in sorted(self.counts.items())
            },
        }


def cell_histogram(ds: Dataset, subset: set[str] | None = None,
                   cell_size: float = DEFAULT_ANALYSIS_CELL) -> CellHistogram:
    """Per-map sample counts over square cells (floor rule)."""
    if cell_size <= 0:
        raise ValueError("cell_size must be > 0")
    if subset is not None:
        known = {s.id for s in ds.samples}
        for sid in subset:
            if sid not in known:
                raise UnknownSampleIdError(sid)
    counts: dict[str, dict[tuple[int, int], int]] = {}
    for s in ds.samples:
        if subset is not None and s.id not in subset:
            continue
        cell = cell_of(s.x, s.y, cell_size)
        per_map = counts.setdefault(s.map_id, {})
        per_map[cell] = per_map.get(cell, 0) + 1
    return CellHistogram(cell_size=cell_size, counts=counts)


def heatmap_export(h: CellHistogram, map_id: str) -> dict:
    """Dense count matrix over the bounding box of non-empty cells.

    counts[i - i0][j - j0] holds the samples in cell (i, j); zero cells are
    explicit.
    """
    if map_id not in h.counts:
        raise UnknownMapError(map_id)
    per_map = h.counts[map_id]
    i_vals = [c[0] for c in per_map]
    j_vals = [c[1] for c in per_map]
    i0, i1 = min(i_vals), max(i_vals)
    j0, j1 = min(j_vals), max(j_vals)
    matrix = [[per_map.get((i, j), 0) for j in range(j0, j1 + 1)]
              for i in range(i0, i1 + 1)]
    return {
        "map_id": map_id,
        "cell_size": h.cell_size,
        "i0": i0,
        "j0": j0,
        "counts": matrix,
    }
