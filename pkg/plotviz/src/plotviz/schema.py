"""Validated loading of the simulator's CSV/JSON outputs.

Column sets mirror the producing schemas; anything missing is reported by
name before any rendering starts.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path


class SchemaError(Exception):
    """Input file does not match the producing schema; names the columns."""


class EmptyDataError(Exception):
    """Input parses but holds no usable rows."""


PHASE_COLUMNS = ("jz", "h", "n", "boundary", "op", "window",
                 "f_sat_re", "f_gs_re", "f_ex_re", "status")
TIMESERIES_COLUMNS = ("t", "re_F", "im_F")
OVERLAY_COLUMNS = ("jz", "h")
SCALING_KEYS = ("points", "a", "xi", "jz_inf", "residual")


def load_csv(path: str | Path, required: tuple[str, ...]) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input file {path} does not exist")
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        fields = reader.fieldnames or []
        missing = [c for c in required if c not in fields]
        if missing:
            raise SchemaError(
                f"{path.name} is missing required columns: {', '.join(missing)}"
            )
        rows = list(reader)
    if not rows:
        raise EmptyDataError(f"{path.name} holds no data rows")
    return rows


def load_phase_csv(path: str | Path) -> list[dict]:
    rows = load_csv(path, PHASE_COLUMNS)
    out = []
    for row in rows:
        parsed = dict(row)
        for key in ("jz", "h", "f_sat_re", "f_gs_re", "f_ex_re"):
            parsed[key] = float(row[key])
        parsed["n"] = int(row["n"])
        out.append(parsed)
    return out


def load_timeseries_csv(path: str | Path) -> dict[str, list[float]]:
    rows = load_csv(path, TIMESERIES_COLUMNS)
    return {
        "t": [float(r["t"]) for r in rows],
        "re_F": [float(r["re_F"]) for r in rows],
        "im_F": [float(r["im_F"]) for r in rows],
    }


def load_overlay_csv(path: str | Path) -> dict[str, list[float]]:
    rows = load_csv(path, OVERLAY_COLUMNS)
    return {
        "jz": [float(r["jz"]) for r in rows],
        "h": [float(r["h"]) for r in rows],
    }


def load_scaling_json(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input file {path} does not exist")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path.name} is not valid JSON: {exc.msg}") from exc
    missing = [k for k in SCALING_KEYS if k not in doc]
    if missing:
        raise SchemaError(
            f"{path.name} is missing required keys: {', '.join(missing)}"
        )
    if not doc["points"]:
        raise EmptyDataError(f"{path.name} holds no scaling points")
    return doc


def provenance_hash(input_path: str | Path, manifest_path: str | Path | None = None) -> str:
    """SHA-256 of the producing run's manifest; falls back to the manifest next
    to the input, then to the input itself, so every figure carries provenance."""
    candidates = []
    if manifest_path is not None:
        candidates.append(Path(manifest_path))
    candidates.append(Path(input_path).parent / "manifest.json")
    candidates.append(Path(input_path))
    for candidate in candidates:
        if candidate.exists():
            return hashlib.sha256(candidate.read_bytes()).hexdigest()
    raise SchemaError(f"no provenance source found for {input_path}")
