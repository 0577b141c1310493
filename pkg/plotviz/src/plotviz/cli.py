"""Command line for rendering simulator outputs into figures."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .render import PlotJob, PlotKind, PlotStyle, render
from .schema import EmptyDataError, SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otoc-plotviz",
        description="Render spinchain-otoc CSV/JSON outputs as figures.",
    )
    parser.add_argument("--kind", required=True,
                        choices=[k.value for k in PlotKind])
    parser.add_argument("--input", required=True, help="CSV or JSON data file")
    parser.add_argument("--output", required=True, help="PNG or SVG path")
    parser.add_argument("--manifest", help="manifest of the producing run")
    parser.add_argument("--overlay", action="append", default=[],
                        help="reference boundary CSV with jz,h columns (repeatable)")
    parser.add_argument("--series", nargs="+", default=["f_sat_re", "f_gs_re"],
                        help="columns to plot for cross sections")
    parser.add_argument("--n", type=int, help="system size filter")
    parser.add_argument("--h", type=float, help="cross-section field")
    parser.add_argument("--title", default="")
    parser.add_argument("--style", help="JSON style file (figsize, dpi, cmap)")
    return parser


def load_style(path: str | None) -> PlotStyle:
    if path is None:
        return PlotStyle()
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read style file {path}: {exc}") from exc
    known = {"figsize", "dpi", "cmap", "color_range"}
    unknown = set(doc) - known
    if unknown:
        raise SchemaError(f"unknown style options: {', '.join(sorted(unknown))}")
    kwargs = dict(doc)
    if "figsize" in kwargs:
        kwargs["figsize"] = tuple(kwargs["figsize"])
    if "color_range" in kwargs:
        kwargs["color_range"] = tuple(kwargs["color_range"])
    return PlotStyle(**kwargs)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = PlotJob(
            kind=args.kind,
            input_path=args.input,
            output_path=args.output,
            manifest_path=args.manifest,
            overlays=tuple(args.overlay),
            series=tuple(args.series),
            n_sites=args.n,
            h_value=args.h,
            title=args.title,
            style=load_style(args.style),
        )
        out = render(job)
    except (SchemaError, EmptyDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
