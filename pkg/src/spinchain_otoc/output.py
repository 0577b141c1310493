"""Serialization of results: atomic file writes, 17-significant-digit floats,
and the CSV/JSON schemas shared with downstream tooling."""

from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .otoc import OtocReport, TimeSeries
from .spectral import EigenSystem
from .sweep import ScalingFit, SweepGrid


def format_float(x: float) -> str:
    """17 significant digits: enough to round-trip any double exactly."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def dump_json(obj) -> str:
    """JSON text with floats at full precision (stdlib json cannot format them)."""
    return _json_value(obj, indent=0) + "\n"


def _json_value(obj, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        if math.isnan(x):
            return "NaN"
        return format_float(x)
    if isinstance(obj, str):
        import json as _json

        return _json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{inner}{_json_value(str(k), 0)}: {_json_value(v, indent + 1)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [f"{inner}{_json_value(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_text_atomic(path: Path, text: str) -> None:
    """Write via a sibling temp file and rename, so failures leave no partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def spectrum_csv(es: EigenSystem) -> str:
    lines = ["index,energy,sector,theta"]
    set_of = es.partition.set_of
    for i in range(es.dimension):
        lines.append(
            f"{i},{format_float(float(es.energies[i]))},{int(es.sector_of[i])},{int(set_of[i]) + 1}"
        )
    return "\n".join(lines) + "\n"


def timeseries_csv(series: TimeSeries) -> str:
    lines = ["t,re_F,im_F"]
    for t, f in zip(series.times, series.values):
        lines.append(f"{format_float(float(t))},{format_float(f.real)},{format_float(f.imag)}")
    return "\n".join(lines) + "\n"


def report_json(report: OtocReport) -> str:
    doc = {
        "f_saturation_re": report.f_saturation.real,
        "f_saturation_im": report.f_saturation.imag,
        "f_gs_re": report.f_gs.real,
        "f_gs_im": report.f_gs.imag,
        "f_ex_re": report.f_ex.real,
        "f_ex_im": report.f_ex.imag,
        "terms": {
            key: {"re": value.real, "im": value.imag}
            for key, value in report.terms.items()
        },
        "config": report.metadata,
    }
    if report.f_time_average is not None:
        doc["f_time_average_re"] = report.f_time_average.real
        doc["f_time_average_im"] = report.f_time_average.imag
    return dump_json(doc)


def phase_csv(sweep: SweepGrid) -> str:
    op = sweep.otoc_config.resolved_w(_first_chain(sweep))
    window = sweep.otoc_config.window
    window_text = format_float(window) if window is not None else "none"
    lines = ["jz,h,n,boundary,op,window,f_sat_re,f_gs_re,f_ex_re,status"]
    for p in sweep.points:
        lines.append(
            ",".join(
                [
                    format_float(p.jz_over_j),
                    format_float(p.h_over_j),
                    str(p.n_sites),
                    p.boundary,
                    op.kind.value,
                    window_text,
                    format_float(p.f_saturation.real),
                    format_float(p.f_gs.real),
                    format_float(p.f_ex.real),
                    p.status,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _first_chain(sweep: SweepGrid):
    from .chain import ChainSpec

    n = sweep.spec.n_sites[0]
    return ChainSpec(n_sites=n, jz_over_j=0.0, boundary=sweep.spec.boundary,
                     site_cap=sweep.spec.site_cap)


def scaling_json(fit: ScalingFit) -> str:
    return dump_json(
        {
            "points": [[n, y] for n, y in fit.points],
            "a": fit.a,
            "xi": fit.xi,
            "jz_inf": fit.jz_inf,
            "residual": fit.residual,
        }
    )


def diagnostics_csv(rows: list[dict]) -> str:
    header = ["jz", "h", "n", "intra_ground_max", "cross_set_max", "pr_ground",
              "fluct", "tau"]
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(
                [
                    format_float(row["jz"]),
                    format_float(row["h"]),
                    str(row["n"]),
                    format_float(row["intra_ground_max"]),
                    format_float(row["cross_set_max"]),
                    format_float(row["pr_ground"]),
                    format_float(row["fluct"]),
                    format_float(row["tau"]),
                ]
            )
        )
    return "\n".join(lines) + "\n"
