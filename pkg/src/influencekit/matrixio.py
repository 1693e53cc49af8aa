"""CSV and JSON persistence for score matrices.

Matrices are laid out with sources as rows and targets as columns, a header
row of target ids, and a leading column of source ids.  Two cell formats are
used: 9-significant-digit for emitted influence matrices (stable golden
files) and shortest-round-trip repr for observed-improvement matrices,
which must survive a write/read cycle bit-exactly.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import MalformedManifest


def format_sig9(value: float) -> float:
    """Quantize to 9 significant decimal digits (the emitted-value precision)."""
    return float(f"{value:.9g}")


def matrix_to_csv_text(
    sources, targets, values: np.ndarray, cell: str = "repr"
) -> str:
    """Render a matrix as CSV text; cell is "repr" or "sig9"."""
    fmt = repr if cell == "repr" else (lambda v: f"{v:.9g}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["", *targets])
    for i, src in enumerate(sources):
        writer.writerow([src, *(fmt(float(v)) for v in values[i])])
    return buf.getvalue()


def write_matrix_csv(path: str | Path, sources, targets, values: np.ndarray, cell: str) -> None:
    Path(path).write_text(matrix_to_csv_text(sources, targets, values, cell), encoding="utf-8")


def read_matrix_csv(path: str | Path):
    """Parse a matrix CSV into (sources, targets, float64 array)."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows or len(rows[0]) < 2:
        raise MalformedManifest(f"{path}: not a matrix CSV")
    targets = tuple(rows[0][1:])
    sources = []
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(targets) + 1:
            raise MalformedManifest(
                f"{path}:{lineno}: expected {len(targets) + 1} cells, got {len(row)}"
            )
        sources.append(row[0])
        try:
            data.append([float(c) for c in row[1:]])
        except ValueError as exc:
            raise MalformedManifest(f"{path}:{lineno}: non-numeric cell: {exc}") from exc
    return tuple(sources), targets, np.asarray(data, dtype=np.float64)


def matrix_to_json_obj(sources, targets, values: np.ndarray, **extra) -> dict:
    obj = {
        "sources": list(sources),
        "targets": list(targets),
        "scores": [[float(v) for v in row] for row in values],
    }
    obj.update(extra)
    return obj


def dump_json(path: str | Path, obj: dict) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
