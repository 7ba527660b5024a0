"""Split construction: polygon regions, sequence cutting, attribute balance,
greedy auto-partitioning over the cell grid, and city-wise folds.

Region semantics: point-in-polygon uses the even-odd rule and points exactly
on an edge count as inside; overlaps between regions are resolved by priority
(lower number wins). Sequences straddling a region boundary are cut into
contiguous runs, one partial sequence per run.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .errors import InfeasibleLockError, InvalidPolygonError, OverlappingMapsError, UnknownMapError
from .ingest import Dataset
from .jsonio import read_json, write_json
from .leakage import SplitAssignment, audit

GROW_SETS = ("train", "val", "test")


# ---------------------------------------------------------------------------
# Polygon geometry

def _on_segment(px, py, ax, ay, bx, by) -> bool:
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    if cross != 0.0:
        return False
    dot = (px - ax) * (bx - ax) + (py - ay) * (by - ay)
    return 0.0 <= dot <= (bx - ax) ** 2 + (by - ay) ** 2


def point_in_polygon(x: float, y: float, polygon) -> bool:
    """Even-odd containment; boundary points count as inside."""
    n = len(polygon)
    for k in range(n):
        ax, ay = polygon[k]
        bx, by = polygon[(k + 1) % n]
        if _on_segment(x, y, ax, ay, bx, by):
            return True
    inside = False
    for k in range(n):
        ax, ay = polygon[k]
        bx, by = polygon[(k + 1) % n]
        if (ay > y) != (by > y):
            xi = ax + (y - ay) * (bx - ax) / (by - ay)
            if x < xi:
                inside = not inside
    return inside


def _orient(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _segments_cross(p1, p2, p3, p4) -> bool:
    """True when segments p1p2 and p3p4 share any point."""
    d1 = _orient(*p3, *p4, *p1)
    d2 = _orient(*p3, *p4, *p2)
    d3 = _orient(*p1, *p2, *p3)
    d4 = _orient(*p1, *p2, *p4)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0:
        return True
    for p, (a, b) in ((p1, (p3, p4)), (p2, (p3, p4)), (p3, (p1, p2)), (p4, (p1, p2))):
        if _on_segment(p[0], p[1], a[0], a[1], b[0], b[1]):
            return True
    return False


def validate_polygon(name: str, polygon) -> None:
    """Reject polygons that are too small, non-finite, or self-intersecting.

    The vertex list is implicitly closed; a repeated closing vertex counts as
    a consecutive duplicate and is rejected.
    """
    if len(polygon) < 3:
        raise InvalidPolygonError(name, f"needs >= 3 vertices, got {len(polygon)}")
    n = len(polygon)
    for k, (x, y) in enumerate(polygon):
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InvalidPolygonError(name, f"non-finite vertex {k}")
        if (x, y) == tuple(polygon[(k + 1) % n]):
            raise InvalidPolygonError(name, f"consecutive duplicate vertex {k}")
    # Spikes: consecutive edges folding back along themselves.
    for k in range(n):
        a = polygon[k]
        b = polygon[(k + 1) % n]
        c = polygon[(k + 2) % n]
        if _orient(*a, *b, *c) == 0.0:
            if (c[0] - b[0]) * (b[0] - a[0]) + (c[1] - b[1]) * (b[1] - a[1]) < 0:
                raise InvalidPolygonError(name, f"edges around vertex {(k + 1) % n} fold back")
    # Non-adjacent edge pairs must not touch.
    for i in range(n):
        p1, p2 = polygon[i], polygon[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            p3, p4 = polygon[j], polygon[(j + 1) % n]
            if _segments_cross(tuple(p1), tuple(p2), tuple(p3), tuple(p4)):
                raise InvalidPolygonError(name, f"edges {i} and {j} intersect")


# ---------------------------------------------------------------------------
# Regions

@dataclass(frozen=True)
class Region:
    name: str
    map_id: str
    target_set: str
    priority: int
    polygon: tuple[tuple[float, float], ...]

    def validate(self) -> None:
        if self.target_set not in GROW_SETS:
            raise InvalidPolygonError(self.name, f"unknown target set '{self.target_set}'")
        validate_polygon(self.name, self.polygon)

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [p[0] for p in self.polygon]
        ys = [p[1] for p in self.polygon]
        return (min(xs), min(ys), max(xs), max(ys))


@dataclass(frozen=True)
class RegionSet:
    regions: tuple[Region, ...]

    def validate(self) -> None:
        seen: dict[str, set[int]] = {}
        for r in self.regions:
            r.validate()
            per_map = seen.setdefault(r.map_id, set())
            if r.priority in per_map:
                raise InvalidPolygonError(r.name, f"duplicate priority {r.priority} on map '{r.map_id}'")
            per_map.add(r.priority)

    def by_map(self) -> dict[str, list[Region]]:
        """Regions grouped per map, sorted by priority (lower wins)."""
        out: dict[str, list[Region]] = {}
        for r in self.regions:
            out.setdefault(r.map_id, []).append(r)
        for regions in out.values():
            regions.sort(key=lambda r: r.priority)
        return out


def load_regions(path) -> RegionSet:
    data = read_json(path)
    regions = []
    for rec in data["regions"]:
        regions.append(Region(
            name=rec["name"],
            map_id=rec["map_id"],
            target_set=rec["set"],
            priority=int(rec["priority"]),
            polygon=tuple((float(x), float(y)) for x, y in rec["polygon"]),
        ))
    rs = RegionSet(regions=tuple(regions))
    rs.validate()
    return rs


def regions_to_json_dict(rs: RegionSet) -> dict:
    return {"regions": [
        {"name": r.name, "map_id": r.map_id, "set": r.target_set,
         "priority": r.priority, "polygon": [[x, y] for x, y in r.polygon]}
        for r in rs.regions
    ]}


def save_regions(rs: RegionSet, path) -> None:
    write_json(path, regions_to_json_dict(rs))


# ---------------------------------------------------------------------------
# Region assignment and sequence cutting

@dataclass(frozen=True)
class CutReport:
    # sequence_id -> ((label, first sample id, last sample id), ...)
    runs: dict[str, tuple[tuple[str, str, str], ...]]
    cut_sequences: int

    def to_json_dict(self) -> dict:
        return {
            "cut_sequences": self.cut_sequences,
            "runs": {seq: [list(run) for run in runs] for seq, runs in self.runs.items()},
        }


def _cut_report(ds: Dataset, assignment: dict[str, str]) -> CutReport:
    runs: dict[str, tuple[tuple[str, str, str], ...]] = {}
    cut = 0
    for seq_id, ids in ds.sequences.items():
        seq_runs: list[tuple[str, str, str]] = []
        start = ids[0]
        prev = ids[0]
        label = assignment[ids[0]]
        for sid in ids[1:]:
            if assignment[sid] != label:
                seq_runs.append((label, start, prev))
                start = sid
                label = assignment[sid]
            prev = sid
        seq_runs.append((label, start, prev))
        runs[seq_id] = tuple(seq_runs)
        if len(seq_runs) > 1:
            cut += 1
    return CutReport(runs=runs, cut_sequences=cut)


def _label_for_point(x: float, y: float, regions: list[Region],
                     bboxes: list[tuple[float, float, float, float]]) -> str:
    for r, (x0, y0, x1, y1) in zip(regions, bboxes):
        if x < x0 or x > x1 or y < y0 or y > y1:
            continue
        if point_in_polygon(x, y, r.polygon):
            return r.target_set
    return "unassigned"


def assign_by_regions(ds: Dataset, regions: RegionSet,
                      mode: str = "per_sample") -> tuple[SplitAssignment, CutReport]:
    """Label every sample by the highest-priority region containing it.

    mode 'per_sample' labels samples individually and cuts straddling
    sequences; 'per_sequence' gives a whole sequence the majority label of
    its samples (ties broken toward train, then val, then test).
    """
    if mode not in ("per_sample", "per_sequence"):
        raise ValueError(f"unknown mode '{mode}'")
    regions.validate()
    per_map = regions.by_map()
    bboxes = {m: [r.bbox() for r in rs] for m, rs in per_map.items()}

    assignment: dict[str, str] = {}
    for s in ds.samples:
        rs = per_map.get(s.map_id)
        if not rs:
            assignment[s.id] = "unassigned"
        else:
            assignment[s.id] = _label_for_point(s.x, s.y, rs, bboxes[s.map_id])

    if mode == "per_sequence":
        preference = ("train", "val", "test", "unassigned")
        for ids in ds.sequences.values():
            tally = {label: 0 for label in preference}
            for sid in ids:
                tally[assignment[sid]] += 1
            best = max(preference, key=lambda lab: (tally[lab], -preference.index(lab)))
            for sid in ids:
                assignment[sid] = best

    split = SplitAssignment(assignment=assignment, provenance=f"assign_by_regions({mode})")
    return split, _cut_report(ds, assignment)


# ---------------------------------------------------------------------------
# Attribute balance

@dataclass(frozen=True)
class AttributeBalance:
    key: str
    # attribute value -> {set or "full" -> ratio or None}
    ratios: dict[str, dict[str, float | None]]
    # set or "full" -> number of samples carrying the key
    coverage: dict[str, int]


@dataclass(frozen=True)
class BalanceReport:
    set_counts: dict[str, int]
    proportions: dict[str, float]
    per_city: dict[str, dict[str, int]]
    attributes: list[AttributeBalance]

    def to_json_dict(self) -> dict:
        return {
            "set_counts": self.set_counts,
            "proportions": self.proportions,
            "per_city": self.per_city,
            "attributes": [
                {"key": a.key, "coverage": a.coverage, "ratios": a.ratios}
                for a in self.attributes
            ],
        }

    def max_deviation(self) -> float:
        """Largest |per-set ratio - full ratio| over train/val/test."""
        worst = 0.0
        for a in self.attributes:
            for per_set in a.ratios.values():
                full = per_set.get("full")
                if full is None:
                    continue
                for name in GROW_SETS:
                    r = per_set.get(name)
                    if r is not None:
                        worst = max(worst, abs(r - full))
        return worst


def balance_report(ds: Dataset, split: SplitAssignment,
                   attribute_keys: list[str] | None = None) -> BalanceReport:
    """Per-attribute value ratios within each set against the full-dataset
    ratio; ratios are over samples carrying the attribute key."""
    if attribute_keys is None:
        attribute_keys = ds.attr_keys()
    labels = ("train", "val", "test", "unassigned")
    set_counts = {label: 0 for label in labels}
    per_city: dict[str, dict[str, int]] = {}
    for s in ds.samples:
        label = split.assignment[s.id]
        set_counts[label] += 1
        city = per_city.setdefault(s.map_id, {lab: 0 for lab in labels})
        city[label] += 1

    attributes: list[AttributeBalance] = []
    groups = list(labels) + ["full"]
    for key in attribute_keys:
        coverage = {g: 0 for g in groups}
        counts: dict[str, dict[str, int]] = {}
        for s in ds.samples:
            value = s.attrs.get(key)
            if value is None:
                continue
            label = split.assignment[s.id]
            coverage[label] += 1
            coverage["full"] += 1
            per_value = counts.setdefault(value, {g: 0 for g in groups})
            per_value[label] += 1
            per_value["full"] += 1
        ratios: dict[str, dict[str, float | None]] = {}
        for value in sorted(counts):
            ratios[value] = {
                g: (counts[value][g] / coverage[g] if coverage[g] > 0 else None)
                for g in groups
            }
        attributes.append(AttributeBalance(key=key, ratios=ratios, coverage=coverage))

    return BalanceReport(
        set_counts=set_counts,
        proportions=split.proportions(),
        per_city=per_city,
        attributes=attributes,
    )


# ---------------------------------------------------------------------------
# Greedy auto-partitioning over the cell grid

@dataclass
class _CellStats:
    n: int
    attr_counts: dict[str, dict[str, int]]  # key -> value -> count
    attr_cov: dict[str, int]                # key -> samples carrying key


def _collect_cells(ds: Dataset, cell_size: float, attribute_keys: list[str]):
    cells: dict[tuple[str, int, int], _CellStats] = {}
    sample_cell: dict[str, tuple[str, int, int]] = {}
    for s in ds.samples:
        key = (s.map_id, math.floor(s.x / cell_size), math.floor(s.y / cell_size))
        sample_cell[s.id] = key
        st = cells.get(key)
        if st is None:
            st = _CellStats(n=0, attr_counts={k: {} for k in attribute_keys},
                            attr_cov={k: 0 for k in attribute_keys})
            cells[key] = st
        st.n += 1
        for k in attribute_keys:
            v = s.attrs.get(k)
            if v is not None:
                st.attr_cov[k] += 1
                st.attr_counts[k][v] = st.attr_counts[k].get(v, 0) + 1
    return cells, sample_cell


class _GrowState:
    """Aggregate set counts during greedy growth, with O(attrs) scoring."""

    def __init__(self, total: int, targets: dict[str, float],
                 attribute_keys: list[str], full_ratios: dict[str, dict[str, float]],
                 lambda_balance: float):
        self.total = total
        self.targets = targets
        self.keys = attribute_keys
        self.full = full_ratios
        self.lam = lambda_balance
        self.n = {s: 0 for s in GROW_SETS}
        self.cov = {s: {k: 0 for k in attribute_keys} for s in GROW_SETS}
        self.cnt = {s: {k: {} for k in attribute_keys} for s in GROW_SETS}

    def add(self, set_name: str, st: _CellStats, sign: int = 1) -> None:
        self.n[set_name] += sign * st.n
        for k in self.keys:
            self.cov[set_name][k] += sign * st.attr_cov[k]
            per = self.cnt[set_name][k]
            for v, c in st.attr_counts[k].items():
                per[v] = per.get(v, 0) + sign * c

    def score(self) -> float:
        s = 0.0
        for name in GROW_SETS:
            s += abs(self.n[name] / self.total - self.targets[name])
        if self.lam:
            for k in self.keys:
                for v, full_ratio in self.full[k].items():
                    for name in GROW_SETS:
                        cov = self.cov[name][k]
                        if cov > 0:
                            s += self.lam * abs(self.cnt[name][k].get(v, 0) / cov - full_ratio)
        return s

    def score_with(self, set_name: str, st: _CellStats) -> float:
        self.add(set_name, st, +1)
        result = self.score()
        self.add(set_name, st, -1)
        return result


def _rectangles(cells: set[tuple[int, int]]) -> list[tuple[int, int, int, int]]:
    """Decompose a cell set into maximal-strip rectangles (i0, i1, j0, j1)."""
    by_i: dict[int, list[int]] = {}
    for i, j in cells:
        by_i.setdefault(i, []).append(j)
    strips: dict[int, set[tuple[int, int]]] = {}
    for i, js in by_i.items():
        js.sort()
        start = prev = js[0]
        runs = set()
        for j in js[1:]:
            if j == prev + 1:
                prev = j
            else:
                runs.add((start, prev))
                start = prev = j
        runs.add((start, prev))
        strips[i] = runs

    rects: list[tuple[int, int, int, int]] = []
    open_rects: dict[tuple[int, int], int] = {}  # (j0, j1) -> starting column i0
    prev_i: int | None = None
    for i in sorted(strips):
        if prev_i is not None and i != prev_i + 1:
            for run, i0 in open_rects.items():
                rects.append((i0, prev_i, run[0], run[1]))
            open_rects = {}
        still_open: dict[tuple[int, int], int] = {}
        for run in strips[i]:
            still_open[run] = open_rects.pop(run, i)
        for run, i0 in open_rects.items():
            rects.append((i0, prev_i, run[0], run[1]))
        open_rects = still_open
        prev_i = i
    for run, i0 in open_rects.items():
        rects.append((i0, prev_i, run[0], run[1]))
    rects.sort()
    return rects


def auto_partition(ds: Dataset, targets: tuple[float, float, float] = (0.70, 0.15, 0.15),
                   cell_size: float = 60.0, attribute_keys: list[str] | None = None,
                   locked: SplitAssignment | None = None, seed: int = 0,
                   lambda_balance: float = 1.0) -> tuple[RegionSet, SplitAssignment, CutReport]:
    """Grow one cell block per set per map until every cell is assigned,
    each step attaching the frontier cell that most reduces the deficit
    between current and target proportions plus attribute-ratio deviation.
    The grown blocks are emitted as rectilinear polygon regions.
    """
    if len(targets) != 3 or any(t <= 0 for t in targets) or abs(sum(targets) - 1.0) > 1e-9:
        raise ValueError("targets must be three positive numbers summing to 1")
    if cell_size <= 0:
        raise ValueError("cell_size must be > 0")
    if attribute_keys is None:
        attribute_keys = ds.attr_keys()
    if len(ds) == 0:
        raise ValueError("cannot partition an empty dataset")
    target_by_set = dict(zip(GROW_SETS, targets))

    pins: dict[str, str] = {}
    if locked is not None:
        pins = {sid: lab for sid, lab in locked.assignment.items() if lab in GROW_SETS}
        for name in GROW_SETS:
            frac = sum(1 for lab in pins.values() if lab == name) / len(ds)
            if frac > target_by_set[name] + 0.10:
                raise InfeasibleLockError(name, frac, target_by_set[name])

    cells, sample_cell = _collect_cells(ds, cell_size, attribute_keys)

    full_ratios: dict[str, dict[str, float]] = {}
    for k in attribute_keys:
        cov = sum(st.attr_cov[k] for st in cells.values())
        per_value: dict[str, float] = {}
        if cov > 0:
            merged: dict[str, int] = {}
            for st in cells.values():
                for v, c in st.attr_counts[k].items():
                    merged[v] = merged.get(v, 0) + c
            per_value = {v: c / cov for v, c in merged.items()}
        full_ratios[k] = per_value

    state = _GrowState(len(ds), target_by_set, attribute_keys, full_ratios, lambda_balance)
    cell_label: dict[tuple[str, int, int], str | None] = {c: None for c in cells}
    rng = random.Random(seed)

    # Cells holding locked samples start out assigned to the dominant locked set.
    locked_per_cell: dict[tuple[str, int, int], dict[str, int]] = {}
    for sid, lab in pins.items():
        tally = locked_per_cell.setdefault(sample_cell[sid], {s: 0 for s in GROW_SETS})
        tally[lab] += 1
    for cell_key, tally in sorted(locked_per_cell.items()):
        best = max(GROW_SETS, key=lambda s: (tally[s], -GROW_SETS.index(s)))
        cell_label[cell_key] = best
        state.add(best, cells[cell_key])

    def neighbors(cell_key):
        m, i, j = cell_key
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nk = (m, i + di, j + dj)
            if nk in cell_label:
                yield nk

    # Seed one block per set per map (unless locks already planted one there).
    maps = sorted({c[0] for c in cells})
    for m in maps:
        unassigned = sorted(c for c in cell_label if c[0] == m and cell_label[c] is None)
        present = {cell_label[c] for c in cell_label if c[0] == m and cell_label[c] is not None}
        seeds: list[tuple[str, int, int]] = [c for c in cell_label
                                             if c[0] == m and cell_label[c] is not None]
        for name in GROW_SETS:
            if name in present or not unassigned:
                continue
            if not seeds:
                pick = unassigned[rng.randrange(len(unassigned))]
            else:
                def min_d2(c):
                    return min((c[1] - s[1]) ** 2 + (c[2] - s[2]) ** 2 for s in seeds)
                pick = max(unassigned, key=lambda c: (min_d2(c), c))
            cell_label[pick] = name
            state.add(name, cells[pick])
            seeds.append(pick)
            unassigned.remove(pick)
            present.add(name)

    unassigned_cells = {c for c, lab in cell_label.items() if lab is None}
    frontier: dict[str, set] = {name: set() for name in GROW_SETS}
    for cell_key, lab in cell_label.items():
        if lab is None:
            continue
        for nk in neighbors(cell_key):
            if cell_label[nk] is None:
                frontier[lab].add(nk)

    while unassigned_cells:
        # Score ties are broken toward the set that stays relatively most
        # deficient, so blocks grow interleaved instead of train-first.
        best = None  # (score, relative fill, set index, cell key)
        for si, name in enumerate(GROW_SETS):
            pool = frontier[name]
            if not pool:
                # Enclosed or island-bound set: allow seeding a new block.
                pool = unassigned_cells
            for cell_key in sorted(pool):
                fill = (state.n[name] + cells[cell_key].n) / (target_by_set[name] * state.total)
                cand = (state.score_with(name, cells[cell_key]), fill, si, cell_key)
                if best is None or cand < best:
                    best = cand
        _, _, si, cell_key = best
        name = GROW_SETS[si]
        cell_label[cell_key] = name
        state.add(name, cells[cell_key])
        unassigned_cells.discard(cell_key)
        for f in frontier.values():
            f.discard(cell_key)
        for nk in neighbors(cell_key):
            if cell_label[nk] is None:
                frontier[name].add(nk)

    # Emit the grown blocks as rectangle regions, per map and set.
    regions: list[Region] = []
    for m in maps:
        priority = 1
        for name in GROW_SETS:
            owned = {(c[1], c[2]) for c, lab in cell_label.items() if c[0] == m and lab == name}
            if not owned:
                continue
            for k, (i0, i1, j0, j1) in enumerate(_rectangles(owned)):
                polygon = (
                    (i0 * cell_size, j0 * cell_size),
                    ((i1 + 1) * cell_size, j0 * cell_size),
                    ((i1 + 1) * cell_size, (j1 + 1) * cell_size),
                    (i0 * cell_size, (j1 + 1) * cell_size),
                )
                regions.append(Region(name=f"{m}/{name}/{k}", map_id=m,
                                      target_set=name, priority=priority, polygon=polygon))
                priority += 1

    region_set = RegionSet(regions=tuple(regions))
    split, _ = assign_by_regions(ds, region_set, mode="per_sample")
    assignment = dict(split.assignment)
    for sid, lab in pins.items():
        assignment[sid] = lab
    final = SplitAssignment(assignment=assignment,
                            provenance=f"auto_partition(seed={seed},cell={cell_size})")
    return region_set, final, _cut_report(ds, assignment)


# ---------------------------------------------------------------------------
# City-wise folds

@dataclass(frozen=True)
class FoldSpec:
    name: str
    train_maps: frozenset[str]
    val_maps: frozenset[str]

    def validate(self) -> None:
        overlap = self.train_maps & self.val_maps
        if overlap:
            raise OverlappingMapsError(self.name, overlap)


NUSCENES_MAPS = {
    "boston": "boston-seaport",
    "onenorth": "singapore-onenorth",
    "queenstown": "singapore-queenstown",
    "hollandvillage": "singapore-hollandvillage",
}
ARGOVERSE2_MAPS = ("austin", "detroit", "miami", "palo-alto", "pittsburgh", "washington-dc")
_AV2_REST = frozenset({"austin", "detroit", "palo-alto", "washington-dc"})

FOLD_PRESETS: dict[str, tuple[FoldSpec, ...]] = {
    "nuscenes": (
        FoldSpec("A",
                 train_maps=frozenset({NUSCENES_MAPS["boston"], NUSCENES_MAPS["onenorth"]}),
                 val_maps=frozenset({NUSCENES_MAPS["queenstown"], NUSCENES_MAPS["hollandvillage"]})),
        FoldSpec("B",
                 train_maps=frozenset({NUSCENES_MAPS["boston"], NUSCENES_MAPS["queenstown"],
                                       NUSCENES_MAPS["hollandvillage"]}),
                 val_maps=frozenset({NUSCENES_MAPS["onenorth"]})),
    ),
    "argoverse2": (
        FoldSpec("A", train_maps=frozenset({"miami", "pittsburgh"}), val_maps=_AV2_REST),
        FoldSpec("B", train_maps=frozenset({"miami"}) | _AV2_REST,
                 val_maps=frozenset({"pittsburgh"})),
        FoldSpec("C", train_maps=frozenset({"pittsburgh"}) | _AV2_REST,
                 val_maps=frozenset({"miami"})),
    ),
}


def load_folds(path) -> list[FoldSpec]:
    data = read_json(path)
    folds = []
    for rec in data["folds"]:
        fold = FoldSpec(name=rec["name"],
                        train_maps=frozenset(rec["train_maps"]),
                        val_maps=frozenset(rec["val_maps"]))
        fold.validate()
        folds.append(fold)
    return folds


def folds_to_json_dict(folds) -> dict:
    return {"folds": [
        {"name": f.name, "train_maps": sorted(f.train_maps), "val_maps": sorted(f.val_maps)}
        for f in folds
    ]}


def citywise_folds(ds: Dataset, folds) -> dict[str, SplitAssignment]:
    """Label samples train/val by map membership, per fold."""
    for fold in folds:
        fold.validate()
        for m in sorted(fold.train_maps | fold.val_maps):
            if m not in ds.maps:
                raise UnknownMapError(m)
    out: dict[str, SplitAssignment] = {}
    for fold in folds:
        assignment = {}
        for s in ds.samples:
            if s.map_id in fold.train_maps:
                assignment[s.id] = "train"
            elif s.map_id in fold.val_maps:
                assignment[s.id] = "val"
            else:
                assignment[s.id] = "unassigned"
        out[fold.name] = SplitAssignment(assignment=assignment,
                                         provenance=f"citywise_fold({fold.name})")
    return out


def fold_sizes(ds: Dataset, splits: dict[str, SplitAssignment]) -> dict:
    return {
        name: {
            "counts": {k: v for k, v in split.counts().items() if k != "unassigned" or v},
            "train_fraction": (split.counts()["train"] /
                               max(1, split.counts()["train"] + split.counts()["val"])),
        }
        for name, split in splits.items()
    }


# ---------------------------------------------------------------------------
# Split validation

def validate_split(ds: Dataset, split: SplitAssignment, regions: RegionSet | None = None,
                   targets: tuple[float, float, float] = (0.70, 0.15, 0.15),
                   leak_threshold: float = 5.0, max_leakage: float = 0.02,
                   proportion_tol: float = 0.02, balance_tol: float = 0.05,
                   attribute_keys: list[str] | None = None) -> dict:
    """Gatekeeper checks: totality, geographic disjointness, proportion and
    balance deviation. Failures are report entries, not exceptions."""
    checks: list[dict] = []

    missing = split.missing_ids(ds)
    checks.append({
        "name": "totality",
        "passed": not missing,
        "measured": len(missing),
        "bound": 0,
        "detail": ("all samples labeled" if not missing
                   else f"unlabeled ids: {', '.join(missing[:10])}"),
    })

    train_count = sum(1 for s in ds.samples if split.assignment.get(s.id) == "train")
    if missing or train_count == 0:
        checks.append({"name": "disjointness", "passed": False, "measured": None,
                       "bound": max_leakage,
                       "detail": "cannot audit: split not total or no train samples"})
    else:
        report = audit(ds, split, [leak_threshold])
        worst = max((r.ratios[0] for r in report.sets.values() if r.ratios[0] is not None),
                    default=0.0)
        checks.append({"name": "disjointness", "passed": worst <= max_leakage,
                       "measured": worst, "bound": max_leakage,
                       "detail": f"max val/test overlap ratio at {leak_threshold} m"})

    if missing:
        checks.append({"name": "proportions", "passed": False, "measured": None,
                       "bound": proportion_tol, "detail": "split not total"})
        checks.append({"name": "balance", "passed": False, "measured": None,
                       "bound": balance_tol, "detail": "split not total"})
    else:
        props = split.proportions()
        deviation = max(abs(props[name] - t) for name, t in zip(GROW_SETS, targets))
        checks.append({"name": "proportions", "passed": deviation <= proportion_tol,
                       "measured": deviation, "bound": proportion_tol,
                       "detail": f"max |proportion - target| against {targets}"})
        balance = balance_report(ds, split, attribute_keys)
        dev = balance.max_deviation()
        checks.append({"name": "balance", "passed": dev <= balance_tol,
                       "measured": dev, "bound": balance_tol,
                       "detail": "max |per-set attribute ratio - full ratio|"})

    if regions is not None:
        try:
            regions.validate()
            checks.append({"name": "regions", "passed": True, "measured": None,
                           "bound": None, "detail": "polygons valid, priorities unique"})
        except InvalidPolygonError as e:
            checks.append({"name": "regions", "passed": False, "measured": None,
                           "bound": None, "detail": str(e)})

    return {"passed": all(c["passed"] for c in checks), "checks": checks}
