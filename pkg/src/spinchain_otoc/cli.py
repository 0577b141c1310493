"""Command-line entry point: spectrum dumps, single-point OTOC runs, saturation
reports, phase-diagram sweeps, scaling fits, and diagnostics tables.

Every run writes a manifest JSON echoing the fully-resolved configuration; a
manifest can be fed back through --config to reproduce the run.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .chain import Boundary, ChainSpec, LocalOperatorSpec, PauliKind, build_hamiltonian
from .diagnostics import (
    ansatz_report,
    degeneracy_lifting_period,
    ground_fluctuation,
    ground_state_participation,
)
from .errors import DomainError, SpinchainError, UsageError
from .otoc import (
    InitialState,
    OtocConfig,
    TermIVMode,
    TimeGrid,
    ToleranceMode,
    operators_for,
    otoc_dynamics,
    saturation_degenerate,
    time_average,
)
from .output import (
    diagnostics_csv,
    dump_json,
    phase_csv,
    report_json,
    scaling_json,
    spectrum_csv,
    timeseries_csv,
    write_text_atomic,
)
from .spectral import diagonalize
from .sweep import GridSpec, extract_critical_point, fit_power_law, run_sweep

log = logging.getLogger("spinchain_otoc")

OP_NAMES = {"sz": PauliKind.SIGMA_Z, "sx": PauliKind.SIGMA_X, "sy": PauliKind.SIGMA_Y}

# dest name -> default, per subcommand; None defaults resolve downstream
_COMMON = {
    "output_dir": ".",
    "seed": 1,
    "verbose": 0,
}
_CHAIN = {"n": None, "jz": None, "h": 0.0, "boundary": "auto", "site_cap": 14}
_OPERATOR = {"op": "sz", "site": None}
DEFAULTS: dict[str, dict] = {
    "spectrum": {**_COMMON, **_CHAIN},
    "otoc": {**_COMMON, **_CHAIN, **_OPERATOR, "tmax": 50.0, "samples": 2000,
             "window": None, "initial": "ground"},
    "saturation": {**_COMMON, **_CHAIN, **_OPERATOR, "window": None,
                   "term_iv": "absent", "budget": 200000, "initial": "ground"},
    "phase-diagram": {**_COMMON, **_OPERATOR, "jz": None, "h": None, "n": None,
                      "boundary": "auto", "site_cap": 14, "window": None,
                      "workers": None},
    "scaling": {**_COMMON, "input": None, "h": 0.0, "threshold": 0.5,
                "quantity": "f_gs"},
    "diagnostics": {**_COMMON, **_OPERATOR, "jz": None, "h": 0.0, "n": None,
                    "boundary": "auto", "site_cap": 14},
}
REQUIRED: dict[str, tuple[str, ...]] = {
    "spectrum": ("n", "jz"),
    "otoc": ("n", "jz"),
    "saturation": ("n", "jz"),
    "phase-diagram": ("n", "jz", "h"),
    "scaling": ("input",),
    "diagnostics": ("n", "jz"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinchain-otoc",
        description="Exact OTOC saturation values and phase diagrams for the XXZ chain.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--output-dir", help="directory for result files")
        p.add_argument("--seed", type=int, help="RNG seed for random initial states")
        p.add_argument("--config", help="JSON config file (flags override it)")
        p.add_argument("-v", "--verbose", action="count", default=None)

    def chain(p, grid=False):
        if grid:
            p.add_argument("--n", type=int, nargs="+", help="system sizes")
            p.add_argument("--jz", help="J_z/J range start:stop:step")
            p.add_argument("--h", help="h/J range start:stop:step")
        else:
            p.add_argument("--n", type=int, help="number of sites")
            p.add_argument("--jz", type=float, help="J_z/J coupling")
            p.add_argument("--h", type=float, help="h/J field")
        p.add_argument("--boundary", choices=["open", "periodic", "auto"])
        p.add_argument("--site-cap", type=int, help="dense diagonalization cap")

    def operator(p):
        p.add_argument("--op", choices=sorted(OP_NAMES), help="W = V Pauli kind")
        p.add_argument("--site", type=int, help="operator site (default: bulk)")

    p = sub.add_parser("spectrum", help="dump the eigensystem as CSV")
    common(p)
    chain(p)

    p = sub.add_parser("otoc", help="real-time F(t) plus report for one point")
    common(p)
    chain(p)
    operator(p)
    p.add_argument("--tmax", type=float, help="time-grid extent in 1/J")
    p.add_argument("--samples", type=int, help="number of time samples")
    p.add_argument("--window", type=float, help="averaging window T in 1/J")
    p.add_argument("--initial", choices=["ground", "haar"])

    p = sub.add_parser("saturation", help="degenerate-set saturation report")
    common(p)
    chain(p)
    operator(p)
    p.add_argument("--window", type=float,
                   help="resolve the spectrum as an average over T would")
    p.add_argument("--term-iv", choices=["absent", "scan"])
    p.add_argument("--budget", type=int, help="resonance-scan quadruple budget")
    p.add_argument("--initial", choices=["ground", "haar"])

    p = sub.add_parser("phase-diagram", help="sweep (J_z, h, N) and write CSV")
    common(p)
    chain(p, grid=True)
    operator(p)
    p.add_argument("--window", type=float, help="averaging window T in 1/J")
    p.add_argument("--workers", type=int, help="parallel grid workers")

    p = sub.add_parser("scaling", help="fit J_z^c(N) = a N^xi + J_z_inf from sweep CSV")
    common(p)
    p.add_argument("--input", help="phase-diagram CSV")
    p.add_argument("--h", type=float, help="cross-section field")
    p.add_argument("--threshold", type=float, help="crossing threshold")
    p.add_argument("--quantity", choices=["f_gs", "f_sat"])

    p = sub.add_parser("diagnostics", help="ansatz / PR / fluctuation table")
    common(p)
    chain(p, grid=True)
    operator(p)
    return parser


def parse_range(text) -> tuple[float, ...]:
    """start:stop:step, inclusive of stop within half a step; bare numbers allowed."""
    if isinstance(text, (int, float)):
        return (float(text),)
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    parts = str(text).split(":")
    if len(parts) == 1:
        return (float(parts[0]),)
    if len(parts) != 3:
        raise DomainError(f"range must be start:stop:step, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0:
        raise DomainError(f"range step must be positive, got {step}")
    count = int(np.floor((stop - start) / step + 0.5)) + 1
    if count < 1:
        raise DomainError(f"empty range {text!r}")
    return tuple(float(start + k * step) for k in range(count))


def load_config(path: str | Path) -> dict:
    """Parse a JSON config file; a manifest is accepted via its 'config' key."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise DomainError(
            f"config parse error in {path} at line {exc.lineno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise DomainError(f"config file {path} must hold a JSON object")
    if "config" in data and "tool" in data:
        data = data["config"]
    return data


def resolve_config(subcommand: str, args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags, with unknown keys rejected."""
    defaults = DEFAULTS[subcommand]
    resolved = dict(defaults)
    config_path = getattr(args, "config", None)
    if config_path:
        file_values = load_config(config_path)
        file_values.pop("subcommand", None)
        unknown = set(file_values) - set(defaults)
        if unknown:
            raise DomainError(
                f"unknown config keys for {subcommand}: {', '.join(sorted(unknown))}"
            )
        resolved.update(file_values)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    missing = [k for k in REQUIRED[subcommand] if resolved.get(k) is None]
    if missing:
        raise UsageError(f"missing required parameters: {', '.join(missing)}")
    return resolved


def _boundary(value) -> Boundary | None:
    if value in (None, "auto"):
        return None
    try:
        return Boundary(value)
    except ValueError:
        raise DomainError(f"invalid boundary value {value!r}") from None


def _chain_spec(cfg: dict) -> ChainSpec:
    return ChainSpec(
        n_sites=int(cfg["n"]),
        jz_over_j=float(cfg["jz"]),
        h_over_j=float(cfg["h"]),
        boundary=_boundary(cfg["boundary"]),
        site_cap=int(cfg["site_cap"]),
    )


def _op_spec(cfg: dict, n_sites: int) -> LocalOperatorSpec:
    kind = OP_NAMES.get(cfg["op"])
    if kind is None:
        raise DomainError(f"invalid operator {cfg['op']!r}")
    site = cfg["site"] if cfg["site"] is not None else n_sites // 2
    return LocalOperatorSpec(kind, int(site))


def _initial(cfg: dict) -> InitialState:
    choice = cfg.get("initial", "ground")
    if choice == "ground":
        return InitialState.ground()
    if choice == "haar":
        return InitialState.haar(int(cfg["seed"]))
    raise DomainError(f"invalid initial state {choice!r}")


def _write(outdir: Path, name: str, text: str, outputs: list[str]) -> None:
    write_text_atomic(outdir / name, text)
    outputs.append(name)


def _manifest(outdir: Path, subcommand: str, cfg: dict, outputs: list[str]) -> None:
    doc = {
        "tool": "spinchain-otoc",
        "version": __version__,
        "subcommand": subcommand,
        "config": cfg,
        "outputs": outputs,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    write_text_atomic(outdir / "manifest.json", dump_json(doc))


def cmd_spectrum(cfg: dict, outdir: Path) -> list[str]:
    es = diagonalize(build_hamiltonian(_chain_spec(cfg)))
    outputs: list[str] = []
    _write(outdir, "spectrum.csv", spectrum_csv(es), outputs)
    return outputs


def cmd_otoc(cfg: dict, outdir: Path) -> list[str]:
    chain = _chain_spec(cfg)
    op = _op_spec(cfg, chain.n_sites)
    window = cfg["window"]
    config = OtocConfig(
        w_op=op,
        initial_state=_initial(cfg),
        time_grid=TimeGrid(t_max=float(cfg["tmax"]), n_samples=int(cfg["samples"])),
        average_window=float(window) if window is not None else None,
        tolerance_mode=ToleranceMode.WINDOW if window is not None else ToleranceMode.AUTO,
    )
    es = diagonalize(build_hamiltonian(chain))
    series = otoc_dynamics(es, config)
    report = saturation_degenerate(es, config)
    report.f_time_average = time_average(
        series, window if window is not None else float(cfg["tmax"])
    ).value
    outputs: list[str] = []
    _write(outdir, "otoc_timeseries.csv", timeseries_csv(series), outputs)
    _write(outdir, "otoc_report.json", report_json(report), outputs)
    return outputs


def cmd_saturation(cfg: dict, outdir: Path) -> list[str]:
    chain = _chain_spec(cfg)
    op = _op_spec(cfg, chain.n_sites)
    window = cfg["window"]
    config = OtocConfig(
        w_op=op,
        initial_state=_initial(cfg),
        time_grid=TimeGrid(t_max=max(50.0, window or 0.0)),
        average_window=float(window) if window is not None else None,
        tolerance_mode=ToleranceMode.WINDOW if window is not None else ToleranceMode.AUTO,
        term_iv_mode=TermIVMode.SCAN if cfg["term_iv"] == "scan" else TermIVMode.ASSUME_ABSENT,
        quad_budget=int(cfg["budget"]),
    )
    es = diagonalize(build_hamiltonian(chain))
    report = saturation_degenerate(es, config)
    outputs: list[str] = []
    _write(outdir, "saturation_report.json", report_json(report), outputs)
    return outputs


def cmd_phase_diagram(cfg: dict, outdir: Path) -> list[str]:
    sizes = cfg["n"] if isinstance(cfg["n"], (list, tuple)) else [cfg["n"]]
    grid = GridSpec(
        jz_values=parse_range(cfg["jz"]),
        h_values=parse_range(cfg["h"]),
        n_sites=tuple(int(n) for n in sizes),
        boundary=_boundary(cfg["boundary"]),
        site_cap=int(cfg["site_cap"]),
    )
    window = cfg["window"]
    kind = OP_NAMES.get(cfg["op"])
    if kind is None:
        raise DomainError(f"invalid operator {cfg['op']!r}")
    config = OtocConfig(
        # explicit site pins one operator; otherwise each chain uses its bulk site
        w_op=_op_spec(cfg, max(grid.n_sites)) if cfg["site"] is not None else None,
        w_kind=kind,
        time_grid=TimeGrid(t_max=max(50.0, window or 0.0)),
        average_window=float(window) if window is not None else None,
        tolerance_mode=ToleranceMode.WINDOW if window is not None else ToleranceMode.AUTO,
    )
    sweep = run_sweep(grid, config, workers=cfg["workers"])
    outputs: list[str] = []
    _write(outdir, "phase_diagram.csv", phase_csv(sweep), outputs)
    return outputs


def cmd_scaling(cfg: dict, outdir: Path) -> list[str]:
    path = Path(cfg["input"])
    if not path.exists():
        raise DomainError(f"input CSV {path} does not exist")
    by_n: dict[int, list[tuple[float, float]]] = {}
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        required = {"jz", "h", "n", "f_gs_re", "f_sat_re", "status"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            missing = sorted(required - set(reader.fieldnames or []))
            raise DomainError(f"input CSV missing columns: {', '.join(missing)}")
        column = "f_gs_re" if cfg["quantity"] == "f_gs" else "f_sat_re"
        for row in reader:
            if row["status"] != "ok":
                continue
            if abs(float(row["h"]) - float(cfg["h"])) > 1e-9:
                continue
            by_n.setdefault(int(row["n"]), []).append(
                (float(row["jz"]), float(row[column]))
            )
    points = []
    for n in sorted(by_n):
        samples = sorted(by_n[n])
        jz = np.array([s[0] for s in samples])
        vals = np.array([s[1] for s in samples])
        points.append((n, extract_critical_point(jz, vals, float(cfg["threshold"]))))
    fit = fit_power_law(points)
    outputs: list[str] = []
    _write(outdir, "scaling.json", scaling_json(fit), outputs)
    return outputs


def cmd_diagnostics(cfg: dict, outdir: Path) -> list[str]:
    sizes = cfg["n"] if isinstance(cfg["n"], (list, tuple)) else [cfg["n"]]
    rows = []
    for n in sizes:
        for jz in parse_range(cfg["jz"]):
            for h in parse_range(cfg["h"]):
                chain = ChainSpec(n_sites=int(n), jz_over_j=jz, h_over_j=h,
                                  boundary=_boundary(cfg["boundary"]),
                                  site_cap=int(cfg["site_cap"]))
                op = _op_spec(cfg, chain.n_sites)
                es = diagonalize(build_hamiltonian(chain))
                config = OtocConfig(w_op=op)
                w, _ = operators_for(es, config)
                report = ansatz_report(w, es)
                rows.append(
                    {
                        "jz": jz,
                        "h": h,
                        "n": int(n),
                        "intra_ground_max": report.intra_ground_max,
                        "cross_set_max": report.cross_set_max,
                        "pr_ground": ground_state_participation(es),
                        "fluct": ground_fluctuation(es, op.site),
                        "tau": degeneracy_lifting_period(es),
                    }
                )
    outputs: list[str] = []
    _write(outdir, "diagnostics.csv", diagnostics_csv(rows), outputs)
    return outputs


COMMANDS = {
    "spectrum": cmd_spectrum,
    "otoc": cmd_otoc,
    "saturation": cmd_saturation,
    "phase-diagram": cmd_phase_diagram,
    "scaling": cmd_scaling,
    "diagnostics": cmd_diagnostics,
}


# flags whose values may start with '-' (ranges like -2:5:0.5, negatives)
_VALUE_FLAGS = {"--jz", "--h", "--tmax", "--window", "--threshold", "--site",
                "--seed", "--samples", "--budget", "--site-cap", "--workers"}


def _glue_leading_dash_values(argv: list[str]) -> list[str]:
    out = []
    skip = False
    for k, token in enumerate(argv):
        if skip:
            skip = False
            continue
        nxt = argv[k + 1] if k + 1 < len(argv) else None
        if (token in _VALUE_FLAGS and nxt is not None and nxt.startswith("-")
                and len(nxt) > 1 and (nxt[1].isdigit() or nxt[1] == ".")):
            out.append(f"{token}={nxt}")
            skip = True
        else:
            out.append(token)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(_glue_leading_dash_values(list(argv)))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args.subcommand, args)
        level = logging.WARNING - 10 * min(int(cfg.get("verbose") or 0), 2)
        logging.basicConfig(stream=sys.stderr, level=level,
                            format="%(levelname)s %(message)s")
        outdir = Path(cfg["output_dir"])
        outdir.mkdir(parents=True, exist_ok=True)
        outputs = COMMANDS[args.subcommand](cfg, outdir)
        _manifest(outdir, args.subcommand, cfg, outputs)
        log.info("wrote %s", ", ".join(outputs + ["manifest.json"]))
        return 0
    except UsageError as exc:
        print(parser.format_usage(), file=sys.stderr, end="")
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SpinchainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
