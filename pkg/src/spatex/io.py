"""CSV readers and writers, margin sidecars and run manifests."""

from __future__ import annotations

import csv
import json
import math
import platform
import subprocess
from importlib import metadata
from pathlib import Path

import numpy as np

from .errors import DataError
from .inference.data import MARGINS, ObservationSet
from .model.geometry import SiteSet


def fmt(v) -> str:
    """17 significant digits: round-trips every double."""
    v = float(v)
    if math.isnan(v):
        return ""
    return format(v, ".17g")


def _parse_float(text: str, where: str) -> float:
    s = text.strip()
    try:
        # float() accepts '.' as the only decimal mark regardless of locale
        v = float(s)
    except ValueError:
        raise DataError(f"{where}: non-numeric value {text!r}") from None
    if not math.isfinite(v):
        raise DataError(f"{where}: non-finite value {text!r}")
    return v


def load_sites(path) -> SiteSet:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["site_id", "x", "y"]:
        raise DataError(f"{path}: header must be 'site_id,x,y'")
    ids, coords, seen_id, seen_xy = [], [], {}, {}
    for line, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise DataError(f"{path}:{line}: expected 3 fields, got {len(row)}")
        sid = row[0].strip()
        x = _parse_float(row[1], f"{path}:{line}")
        y = _parse_float(row[2], f"{path}:{line}")
        if sid in seen_id:
            raise DataError(f"{path}: duplicate site id {sid!r} on lines {seen_id[sid]} and {line}")
        if (x, y) in seen_xy:
            raise DataError(f"{path}: duplicate coordinates ({x:g}, {y:g}) on lines "
                            f"{seen_xy[(x, y)]} and {line}")
        seen_id[sid] = line
        seen_xy[(x, y)] = line
        ids.append(sid)
        coords.append((x, y))
    if not ids:
        raise DataError(f"{path}: empty site set")
    return SiteSet(np.array(coords), tuple(ids))


def sidecar(path) -> Path:
    return Path(str(path) + ".json")


def load_observations(path, sites: SiteSet) -> ObservationSet:
    """Rows are replicates; the first column is an id, the rest are matched
    to site ids by header.  Empty cells are missing."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    cols = header[1:]
    unknown = [c for c in cols if c not in sites.site_ids]
    absent = [s for s in sites.site_ids if s not in cols]
    if unknown or absent or len(set(cols)) != len(cols):
        raise DataError(f"{path}: columns do not match sites; unknown columns {unknown}, "
                        f"sites without a column {absent}")
    order = [cols.index(s) for s in sites.site_ids]
    values, ids = [], []
    for line, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
        ids.append(row[0].strip())
        vals = []
        for j in order:
            cell = row[j + 1]
            vals.append(math.nan if not cell.strip() else
                        _parse_float(cell, f"{path}: row {line}, column {header[j + 1]!r}"))
        values.append(vals)
    if not values:
        raise DataError(f"{path}: no data rows")
    margins = "raw"
    side = sidecar(path)
    if side.exists():
        margins = json.loads(side.read_text()).get("margins", "raw")
        if margins not in MARGINS:
            raise DataError(f"{side}: unknown margins {margins!r}")
    arr = np.array(values)
    return ObservationSet(arr, np.isnan(arr), margins, sites, tuple(ids))


def write_matrix(path, ids, columns, matrix, id_name: str = "replicate") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([id_name, *columns])
        for rid, row in zip(ids, matrix):
            w.writerow([rid, *(fmt(v) for v in row)])


def write_observations(path, data: ObservationSet, extra: dict | None = None) -> None:
    ids = data.row_ids or tuple(str(i + 1) for i in range(data.n))
    write_matrix(path, ids, data.sites.site_ids, data.values)
    sidecar(path).write_text(json.dumps({"margins": data.margins, **(extra or {})}, indent=2,
                                        sort_keys=True) + "\n")


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True,
                             text=True, timeout=5, cwd=Path(__file__).parent)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")


def write_manifest(path, command: str, config: dict, seed, wall_time: float, extra=None) -> None:
    doc = {"command": command, "config": config, "seed": seed, "tool_version": tool_version(),
           "git_describe": git_describe(), "python": platform.python_version(),
           "wall_time_s": wall_time}
    if extra:
        doc.update(extra)
    write_json(path, doc)
