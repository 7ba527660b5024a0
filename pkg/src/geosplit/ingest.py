"""Loading, validation, and resampling of pose logs and map-element files.

Neutral input formats (one record per line):
  samples.jsonl   {"id", "sequence_id", "map_id", "x", "y", "t", "keyframe", "attrs"}
  samples.csv     header ``id,sequence_id,map_id,x,y,t,keyframe,<attr1>,...``
  elements.jsonl  {"frame_id", "class", "points", "confidence"?}

Loaded collections are immutable and safe to share across threads.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DegeneratePolylineError,
    DuplicateIdError,
    MissingConfidenceError,
    NonMonotoneTimeError,
    ParseError,
)

SAMPLE_COLUMNS = ("id", "sequence_id", "map_id", "x", "y", "t", "keyframe")
ELEMENT_CLASSES = ("divider", "boundary", "crossing")


@dataclass(frozen=True)
class Sample:
    """One timestamped vehicle pose in a map-local planar frame."""

    id: str
    sequence_id: str
    map_id: str
    x: float
    y: float
    t: int
    keyframe: bool
    attrs: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Dataset:
    samples: tuple[Sample, ...]
    sequences: dict[str, tuple[str, ...]]
    maps: frozenset[str]

    @classmethod
    def from_samples(cls, samples) -> "Dataset":
        """Build a dataset, enforcing id uniqueness, finite coordinates,
        strictly increasing timestamps per sequence, and one map per sequence."""
        samples = tuple(samples)
        by_id: dict[str, Sample] = {}
        seq_ids: dict[str, list[str]] = {}
        seq_last_t: dict[str, int] = {}
        seq_map: dict[str, str] = {}
        for pos, s in enumerate(samples):
            if s.id in by_id:
                raise DuplicateIdError(s.id)
            if not (math.isfinite(s.x) and math.isfinite(s.y)):
                raise ParseError(pos + 1, "x", f"non-finite coordinate for sample '{s.id}'")
            prev_t = seq_last_t.get(s.sequence_id)
            if prev_t is not None and s.t <= prev_t:
                raise NonMonotoneTimeError(s.sequence_id, pos + 1)
            prev_map = seq_map.get(s.sequence_id)
            if prev_map is not None and prev_map != s.map_id:
                raise ParseError(
                    pos + 1, "map_id",
                    f"sequence '{s.sequence_id}' spans maps '{prev_map}' and '{s.map_id}'",
                )
            by_id[s.id] = s
            seq_ids.setdefault(s.sequence_id, []).append(s.id)
            seq_last_t[s.sequence_id] = s.t
            seq_map[s.sequence_id] = s.map_id
        sequences = {k: tuple(v) for k, v in seq_ids.items()}
        maps = frozenset(s.map_id for s in samples)
        return cls(samples=samples, sequences=sequences, maps=maps)

    def __len__(self) -> int:
        return len(self.samples)

    def by_id(self, sample_id: str) -> Sample:
        return self._index()[sample_id]

    def _index(self) -> dict[str, Sample]:
        # Lazy id index; object.__setattr__ because the dataclass is frozen.
        idx = getattr(self, "_id_index", None)
        if idx is None:
            idx = {s.id: s for s in self.samples}
            object.__setattr__(self, "_id_index", idx)
        return idx

    def attr_keys(self) -> list[str]:
        keys: set[str] = set()
        for s in self.samples:
            keys.update(s.attrs)
        return sorted(keys)


@dataclass(frozen=True)
class MapElement:
    """A class-labeled 2-D polyline in a frame-local coordinate system."""

    frame_id: str
    cls: str
    points: tuple[tuple[float, float], ...]
    confidence: float | None = None


def _require(record: dict, key: str, line: int):
    if key not in record:
        raise ParseError(line, key, "missing field")
    return record[key]


def _as_str(value, key: str, line: int) -> str:
    if not isinstance(value, str) or value == "":
        raise ParseError(line, key, f"expected non-empty string, got {value!r}")
    return value


def _as_float(value, key: str, line: int) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(line, key, f"expected number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ParseError(line, key, "non-finite value")
    return v


def _as_int(value, key: str, line: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(line, key, f"expected integer, got {value!r}")
    return value


def _as_bool(value, key: str, line: int) -> bool:
    if not isinstance(value, bool):
        raise ParseError(line, key, f"expected boolean, got {value!r}")
    return value


def _parse_attrs(value, line: int) -> dict[str, str]:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ParseError(line, "attrs", f"expected object, got {value!r}")
    attrs: dict[str, str] = {}
    for k, v in value.items():
        if not isinstance(k, str) or not isinstance(v, str):
            raise ParseError(line, "attrs", f"expected string-to-string map, got {k!r}: {v!r}")
        if v != "":
            attrs[k] = v
    return attrs


def _sample_from_json(record: dict, line: int) -> Sample:
    return Sample(
        id=_as_str(_require(record, "id", line), "id", line),
        sequence_id=_as_str(_require(record, "sequence_id", line), "sequence_id", line),
        map_id=_as_str(_require(record, "map_id", line), "map_id", line),
        x=_as_float(_require(record, "x", line), "x", line),
        y=_as_float(_require(record, "y", line), "y", line),
        t=_as_int(_require(record, "t", line), "t", line),
        keyframe=_as_bool(_require(record, "keyframe", line), "keyframe", line),
        attrs=_parse_attrs(record.get("attrs"), line),
    )


def _sample_from_csv_row(row: list[str], attr_keys: list[str], line: int) -> Sample:
    if len(row) != len(SAMPLE_COLUMNS) + len(attr_keys):
        raise ParseError(line, "row", f"expected {len(SAMPLE_COLUMNS) + len(attr_keys)} columns, got {len(row)}")
    rec = dict(zip(SAMPLE_COLUMNS, row))
    try:
        x = float(rec["x"])
        y = float(rec["y"])
    except ValueError:
        raise ParseError(line, "x", f"not a number: {rec['x']!r},{rec['y']!r}") from None
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ParseError(line, "x", "non-finite coordinate")
    try:
        t = int(rec["t"])
    except ValueError:
        raise ParseError(line, "t", f"not an integer: {rec['t']!r}") from None
    if rec["keyframe"] not in ("true", "false"):
        raise ParseError(line, "keyframe", f"expected 'true' or 'false', got {rec['keyframe']!r}")
    for key in ("id", "sequence_id", "map_id"):
        if rec[key] == "":
            raise ParseError(line, key, "empty value")
    attrs = {k: v for k, v in zip(attr_keys, row[len(SAMPLE_COLUMNS):]) if v != ""}
    return Sample(
        id=rec["id"],
        sequence_id=rec["sequence_id"],
        map_id=rec["map_id"],
        x=x,
        y=y,
        t=t,
        keyframe=rec["keyframe"] == "true",
        attrs=attrs,
    )


def load_samples(path: str | Path, format: str | None = None) -> Dataset:
    """Load a pose log into a validated Dataset.

    The whole file is rejected on any malformed record, with the offending
    line number in the error. ``format`` is 'jsonl' or 'csv'; inferred from
    the file suffix when omitted.
    """
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if format not in ("jsonl", "csv"):
        raise ValueError(f"unsupported format '{format}'")

    samples: list[Sample] = []
    seen_ids: set[str] = set()
    seq_last: dict[str, tuple[int, str]] = {}  # sequence_id -> (last t, map_id)

    def _admit(s: Sample, line: int) -> None:
        if s.id in seen_ids:
            raise DuplicateIdError(s.id)
        prev = seq_last.get(s.sequence_id)
        if prev is not None:
            if s.t <= prev[0]:
                raise NonMonotoneTimeError(s.sequence_id, line)
            if s.map_id != prev[1]:
                raise ParseError(
                    line, "map_id",
                    f"sequence '{s.sequence_id}' spans maps '{prev[1]}' and '{s.map_id}'",
                )
        seen_ids.add(s.id)
        seq_last[s.sequence_id] = (s.t, s.map_id)
        samples.append(s)

    if format == "jsonl":
        with path.open("r", encoding="utf-8") as f:
            for line_no, raw in enumerate(f, start=1):
                if raw.strip() == "":
                    continue
                try:
                    record = json.loads(raw)
                except json.JSONDecodeError as e:
                    raise ParseError(line_no, "json", str(e)) from None
                if not isinstance(record, dict):
                    raise ParseError(line_no, "json", "record is not an object")
                _admit(_sample_from_json(record, line_no), line_no)
    else:
        with path.open("r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is not None:
                if tuple(header[: len(SAMPLE_COLUMNS)]) != SAMPLE_COLUMNS:
                    raise ParseError(
                        1, "header",
                        f"expected columns {','.join(SAMPLE_COLUMNS)},... got {','.join(header)}",
                    )
                attr_keys = list(header[len(SAMPLE_COLUMNS):])
                for line_no, row in enumerate(reader, start=2):
                    if not row:
                        continue
                    _admit(_sample_from_csv_row(row, attr_keys, line_no), line_no)

    return Dataset.from_samples(samples)


def save_samples(ds: Dataset, path: str | Path, format: str | None = None) -> None:
    """Write a dataset back to samples.jsonl / samples.csv."""
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if format == "jsonl":
        with path.open("w", encoding="utf-8") as f:
            for s in ds.samples:
                f.write(json.dumps({
                    "id": s.id, "sequence_id": s.sequence_id, "map_id": s.map_id,
                    "x": s.x, "y": s.y, "t": s.t, "keyframe": s.keyframe,
                    "attrs": dict(sorted(s.attrs.items())),
                }, sort_keys=False))
                f.write("\n")
    elif format == "csv":
        attr_keys = ds.attr_keys()
        with path.open("w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(list(SAMPLE_COLUMNS) + attr_keys)
            for s in ds.samples:
                writer.writerow(
                    [s.id, s.sequence_id, s.map_id, repr(s.x), repr(s.y), s.t,
                     "true" if s.keyframe else "false"]
                    + [s.attrs.get(k, "") for k in attr_keys]
                )
    else:
        raise ValueError(f"unsupported format '{format}'")


def resample_sequences(ds: Dataset, mode: str, n: int = 1) -> Dataset:
    """Thin a dataset by sampling density.

    mode 'keyframes_only' keeps keyframe samples; 'every_nth' keeps, per
    sequence, the 1st, (n+1)th, (2n+1)th... sample in time order; 'all' is
    the identity. Relative order is preserved.
    """
    if mode == "all":
        return ds
    if mode == "keyframes_only":
        kept = {s.id for s in ds.samples if s.keyframe}
    elif mode == "every_nth":
        if n < 1:
            raise ValueError("n must be >= 1")
        kept = set()
        for ids in ds.sequences.values():
            kept.update(ids[::n])
    else:
        raise ValueError(f"unknown resampling mode '{mode}'")
    return Dataset.from_samples(s for s in ds.samples if s.id in kept)


def _validate_points(points, frame_id: str, line: int) -> tuple[tuple[float, float], ...]:
    if not isinstance(points, list) or len(points) < 2:
        raise DegeneratePolylineError(frame_id, f"needs >= 2 points, got {points!r}")
    out: list[tuple[float, float]] = []
    for p in points:
        if not isinstance(p, (list, tuple)) or len(p) != 2:
            raise ParseError(line, "points", f"expected [x, y] pair, got {p!r}")
        x = _as_float(p[0], "points", line)
        y = _as_float(p[1], "points", line)
        if out and out[-1] == (x, y):
            raise DegeneratePolylineError(frame_id, f"consecutive duplicate point {p!r}")
        out.append((x, y))
    return tuple(out)


def load_map_elements(path: str | Path, require_confidence: bool = False) -> dict[str, list[MapElement]]:
    """Load elements.jsonl, grouped by frame_id in file order."""
    path = Path(path)
    grouped: dict[str, list[MapElement]] = {}
    with path.open("r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            if raw.strip() == "":
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as e:
                raise ParseError(line_no, "json", str(e)) from None
            if not isinstance(record, dict):
                raise ParseError(line_no, "json", "record is not an object")
            frame_id = _as_str(_require(record, "frame_id", line_no), "frame_id", line_no)
            cls = _as_str(_require(record, "class", line_no), "class", line_no)
            if cls not in ELEMENT_CLASSES:
                raise ParseError(line_no, "class", f"expected one of {ELEMENT_CLASSES}, got {cls!r}")
            points = _validate_points(_require(record, "points", line_no), frame_id, line_no)
            confidence = None
            if "confidence" in record and record["confidence"] is not None:
                confidence = _as_float(record["confidence"], "confidence", line_no)
                if not 0.0 <= confidence <= 1.0:
                    raise ParseError(line_no, "confidence", f"outside [0, 1]: {confidence}")
            elif require_confidence:
                raise MissingConfidenceError(frame_id)
            grouped.setdefault(frame_id, []).append(
                MapElement(frame_id=frame_id, cls=cls, points=points, confidence=confidence)
            )
    return grouped


def save_map_elements(grouped: dict[str, list[MapElement]], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as f:
        for frame_id in grouped:
            for el in grouped[frame_id]:
                record = {"frame_id": el.frame_id, "class": el.cls,
                          "points": [[x, y] for x, y in el.points]}
                if el.confidence is not None:
                    record["confidence"] = el.confidence
                f.write(json.dumps(record))
                f.write("\n")
