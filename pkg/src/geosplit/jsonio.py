"""Canonical JSON writing and file digests.

All JSON artifacts are written with sorted keys, two-space indentation, a
trailing newline, and Python's shortest round-trip float repr, so identical
inputs always produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(canonical_dumps(obj), encoding="utf-8")


def read_json(path: str | Path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()
