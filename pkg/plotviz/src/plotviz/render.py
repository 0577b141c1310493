"""Figure rendering: phase-diagram heatmaps, cross-sections, time series, and
scaling-fit overlays, with run provenance embedded in every image."""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schema import (
    EmptyDataError,
    SchemaError,
    load_overlay_csv,
    load_phase_csv,
    load_scaling_json,
    load_timeseries_csv,
    provenance_hash,
)

# identical inputs must render identical bytes
matplotlib.rcParams["svg.hashsalt"] = "spinchain-otoc-plotviz"


class PlotKind(str, Enum):
    HEATMAP = "heatmap"
    CROSS_SECTION = "cross_section"
    TIME_SERIES = "time_series"
    SCALING = "scaling"


@dataclass(frozen=True)
class PlotStyle:
    figsize: tuple[float, float] = (6.4, 4.8)
    dpi: int = 120
    cmap: str = "viridis"
    color_range: tuple[float, float] = (0.0, 1.0)  # Pauli OTOC bound


@dataclass(frozen=True)
class PlotJob:
    kind: PlotKind | str
    input_path: Path
    output_path: Path
    manifest_path: Optional[Path] = None
    overlays: tuple[Path, ...] = ()  # reference boundary polylines, (jz, h) CSV
    series: tuple[str, ...] = ("f_sat_re", "f_gs_re")
    n_sites: Optional[int] = None  # cross-section filter; default: smallest N
    h_value: Optional[float] = None  # cross-section field; default: smallest h
    title: str = ""
    style: PlotStyle = field(default_factory=PlotStyle)

    def __post_init__(self):
        object.__setattr__(self, "kind", PlotKind(self.kind))
        object.__setattr__(self, "input_path", Path(self.input_path))
        object.__setattr__(self, "output_path", Path(self.output_path))
        if self.manifest_path is not None:
            object.__setattr__(self, "manifest_path", Path(self.manifest_path))
        object.__setattr__(self, "overlays", tuple(Path(p) for p in self.overlays))


def render(job: PlotJob) -> Path:
    """Render one job to PNG/SVG; deterministic for identical inputs."""
    stamp = provenance_hash(job.input_path, job.manifest_path)
    fig = plt.figure(figsize=job.style.figsize, dpi=job.style.dpi)
    try:
        ax = fig.add_subplot(111)
        if job.kind is PlotKind.HEATMAP:
            _heatmap(ax, fig, job)
        elif job.kind is PlotKind.CROSS_SECTION:
            _cross_section(ax, job)
        elif job.kind is PlotKind.TIME_SERIES:
            _time_series(ax, job)
        else:
            _scaling(ax, job)
        if job.title:
            ax.set_title(job.title)
        fig.text(0.01, 0.005, f"manifest sha256 {stamp[:16]}", fontsize=6,
                 color="0.45", family="monospace")
        _save_atomic(fig, job, stamp)
    finally:
        plt.close(fig)
    return job.output_path


def _grid_values(rows: list[dict], column: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    jz_values = np.array(sorted({r["jz"] for r in rows}))
    h_values = np.array(sorted({r["h"] for r in rows}))
    grid = np.full((len(h_values), len(jz_values)), np.nan)
    jz_index = {v: i for i, v in enumerate(jz_values)}
    h_index = {v: i for i, v in enumerate(h_values)}
    for r in rows:
        if r["status"] == "ok":
            grid[h_index[r["h"]], jz_index[r["jz"]]] = r[column]
    return jz_values, h_values, grid


def _heatmap(ax, fig, job: PlotJob) -> None:
    rows = load_phase_csv(job.input_path)
    sizes = sorted({r["n"] for r in rows})
    n = job.n_sites if job.n_sites is not None else sizes[0]
    rows = [r for r in rows if r["n"] == n]
    if not rows:
        raise EmptyDataError(f"no rows with n={n}")
    jz, h, grid = _grid_values(rows, job.series[0])
    vmin, vmax = job.style.color_range
    mesh = ax.pcolormesh(jz, h, grid, cmap=job.style.cmap, vmin=vmin, vmax=vmax,
                         shading="nearest")
    fig.colorbar(mesh, ax=ax, label=job.series[0])
    for overlay in job.overlays:
        line = load_overlay_csv(overlay)
        ax.plot(line["jz"], line["h"], color="crimson", linewidth=1.6)
    ax.set_xlabel(r"$J_z/J$")
    ax.set_ylabel(r"$h/J$")


def _cross_section(ax, job: PlotJob) -> None:
    rows = load_phase_csv(job.input_path)
    missing = [col for col in job.series if rows and col not in rows[0]]
    if missing:
        raise SchemaError(f"requested series not in input: {', '.join(missing)}")
    sizes = sorted({r["n"] for r in rows})
    n = job.n_sites if job.n_sites is not None else sizes[0]
    fields = sorted({r["h"] for r in rows})
    h = job.h_value if job.h_value is not None else fields[0]
    sel = sorted((r for r in rows
                  if r["n"] == n and abs(r["h"] - h) < 1e-9 and r["status"] == "ok"),
                 key=lambda r: r["jz"])
    if not sel:
        raise EmptyDataError(f"no successful rows with n={n}, h={h}")
    jz = [r["jz"] for r in sel]
    markers = ("s", "x", "o", "d")
    for column, marker in zip(job.series, markers):
        ax.plot(jz, [r[column] for r in sel], marker=marker, markersize=4,
                linewidth=1.0, label=column)
    ax.set_xlabel(r"$J_z/J$")
    ax.set_ylabel(r"$F$")
    ax.legend()


def _time_series(ax, job: PlotJob) -> None:
    data = load_timeseries_csv(job.input_path)
    ax.plot(data["t"], data["re_F"], linewidth=1.0, label="Re F")
    if any(abs(v) > 1e-12 for v in data["im_F"]):
        ax.plot(data["t"], data["im_F"], linewidth=0.8, alpha=0.6, label="Im F")
    ax.set_xlabel(r"$t J$")
    ax.set_ylabel(r"$F(t)$")
    ax.legend()


def _scaling(ax, job: PlotJob) -> None:
    doc = load_scaling_json(job.input_path)
    ns = np.array([p[0] for p in doc["points"]], dtype=float)
    ys = np.array([p[1] for p in doc["points"]], dtype=float)
    ax.plot(ns, ys, "o", label="critical points")
    dense = np.linspace(ns.min(), ns.max(), 256)
    fit = doc["a"] * dense ** doc["xi"] + doc["jz_inf"]
    ax.plot(dense, fit, "-",
            label=rf"$a N^{{{doc['xi']:.3f}}} + {doc['jz_inf']:.3f}$")
    ax.set_xlabel(r"$N$")
    ax.set_ylabel(r"$J_z^c$")
    ax.legend()


def _save_atomic(fig, job: PlotJob, stamp: str) -> None:
    out = job.output_path
    out.parent.mkdir(parents=True, exist_ok=True)
    suffix = out.suffix.lower()
    if suffix not in (".png", ".svg"):
        raise SchemaError(f"unsupported output format {suffix!r} (use .png or .svg)")
    if suffix == ".png":
        metadata = {"Software": "otoc-plotviz", "provenance": f"sha256:{stamp}"}
    else:
        metadata = {"Date": None, "Creator": "otoc-plotviz"}
    fd, tmp = tempfile.mkstemp(dir=out.parent, prefix=f".{out.name}.",
                               suffix=suffix)
    os.close(fd)
    try:
        fig.savefig(tmp, format=suffix[1:], metadata=metadata)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
