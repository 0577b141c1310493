"""Phase-diagram sweeps over (J_z/J, h/J, N), critical-point extraction from
saturation curves, and the finite-size power-law fit."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .chain import Boundary, ChainSpec, build_hamiltonian
from .errors import DomainError, FitError, NotFoundError, SweepError
from .otoc import OtocConfig, saturation_degenerate
from .spectral import diagonalize

WORKERS_ENV = "SPINCHAIN_OTOC_WORKERS"


@dataclass(frozen=True)
class GridSpec:
    """The (J_z/J, h/J, N) product grid of a sweep."""

    jz_values: tuple[float, ...]
    h_values: tuple[float, ...]
    n_sites: tuple[int, ...]
    boundary: Optional[Boundary | str] = None  # None: per-size default
    site_cap: int = 14

    def __post_init__(self):
        for name, values in (("jz_values", self.jz_values),
                             ("h_values", self.h_values),
                             ("n_sites", self.n_sites)):
            arr = np.asarray(values, dtype=np.float64)
            if len(arr) == 0:
                raise DomainError(f"{name} is empty")
            if len(arr) > 1 and np.any(np.diff(arr) <= 0):
                raise DomainError(f"{name} must be strictly increasing")

    @property
    def points(self) -> list[tuple[int, float, float]]:
        return [
            (n, jz, h)
            for n in self.n_sites
            for jz in self.jz_values
            for h in self.h_values
        ]


@dataclass
class SweepPoint:
    n_sites: int
    jz_over_j: float
    h_over_j: float
    boundary: str
    status: str  # "ok" or "error"
    f_saturation: complex = 0.0j
    f_gs: complex = 0.0j
    f_ex: complex = 0.0j
    error: str = ""
    metadata: dict = field(default_factory=dict)


@dataclass
class SweepGrid:
    spec: GridSpec
    otoc_config: OtocConfig
    points: list[SweepPoint]

    def curve(self, n_sites: int, h_over_j: float, quantity: str = "f_gs"
              ) -> tuple[np.ndarray, np.ndarray]:
        """(jz, Re quantity) cross-section at fixed N and h, successful points only."""
        sel = [
            p for p in self.points
            if p.n_sites == n_sites and p.h_over_j == h_over_j and p.status == "ok"
        ]
        jz = np.array([p.jz_over_j for p in sel])
        val = np.array([getattr(p, quantity).real for p in sel])
        return jz, val


def _evaluate_point(args) -> SweepPoint:
    n, jz, h, boundary, site_cap, config = args
    boundary_label = Boundary(boundary).value if boundary else "auto"
    try:
        chain = ChainSpec(n_sites=n, jz_over_j=jz, h_over_j=h, boundary=boundary,
                          site_cap=site_cap)
        es = diagonalize(build_hamiltonian(chain))
        report = saturation_degenerate(es, config)
        return SweepPoint(
            n_sites=n, jz_over_j=jz, h_over_j=h, boundary=chain.boundary.value,
            status="ok", f_saturation=report.f_saturation, f_gs=report.f_gs,
            f_ex=report.f_ex, metadata=report.metadata,
        )
    except Exception as exc:  # record, never abort the grid
        return SweepPoint(
            n_sites=n, jz_over_j=jz, h_over_j=h, boundary=boundary_label,
            status="error", error=f"{type(exc).__name__}: {exc}",
        )


def resolve_workers(workers: Optional[int] = None) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else 1
    return max(1, workers)


def run_sweep(grid: GridSpec, config: OtocConfig, workers: Optional[int] = None) -> SweepGrid:
    """Build -> diagonalize -> saturation at every grid point.

    Points are independent; results are assembled in grid order regardless of
    completion order, and per-point failures are recorded rather than raised.
    """
    tasks = [
        (n, jz, h, grid.boundary, grid.site_cap, config)
        for (n, jz, h) in grid.points
    ]
    n_workers = resolve_workers(workers)
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            points = list(pool.map(_evaluate_point, tasks))
    else:
        points = [_evaluate_point(t) for t in tasks]
    if all(p.status == "error" for p in points):
        raise SweepError(
            f"all {len(points)} sweep points failed; first error: {points[0].error}"
        )
    return SweepGrid(spec=grid, otoc_config=config, points=points)


def extract_critical_point(jz: np.ndarray, values: np.ndarray, threshold: float) -> float:
    """First crossing of the threshold along increasing J_z, linearly interpolated."""
    jz = np.asarray(jz, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if len(jz) != len(values) or len(jz) < 2:
        raise DomainError("curve needs at least two samples")
    if np.any(np.diff(jz) <= 0):
        raise DomainError("curve must be sampled on increasing J_z")
    rel = values - threshold
    for i in range(len(jz) - 1):
        if rel[i] == 0.0:
            return float(jz[i])
        if rel[i] * rel[i + 1] < 0:
            frac = rel[i] / (rel[i] - rel[i + 1])
            return float(jz[i] + frac * (jz[i + 1] - jz[i]))
    if rel[-1] == 0.0:
        return float(jz[-1])
    raise NotFoundError(
        f"curve never crosses threshold {threshold} on [{jz[0]}, {jz[-1]}]"
    )


@dataclass
class ScalingFit:
    """Parameters of J_z^c(N) = a N^xi + J_z_inf."""

    a: float
    xi: float
    jz_inf: float
    residual: float
    points: list[tuple[int, float]]


def fit_power_law(points: Sequence[tuple[float, float]]) -> ScalingFit:
    """Damped least-squares fit of the three-parameter power law.

    Deterministic initialization: xi0 = -1, offset from the largest N, amplitude
    from the smallest N.
    """
    pts = sorted((float(n), float(y)) for n, y in points)
    if len(pts) < 3:
        raise FitError(f"need at least 3 points, got {len(pts)}")
    ns = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if len(np.unique(ns)) != len(ns):
        raise FitError("system sizes must be distinct")
    if np.allclose(ys, ys[0], atol=1e-300, rtol=0):
        raise FitError("curve is constant; power law is degenerate")
    xi0 = -1.0
    c0 = ys[-1]
    a0 = (ys[0] - c0) * ns[0]  # (y - c) / N^xi0 with xi0 = -1
    if a0 == 0.0:
        a0 = 1.0

    def model(p, n):
        return p[0] * np.power(n, p[1]) + p[2]

    def resid(p):
        return model(p, ns) - ys

    result = least_squares(resid, x0=[a0, xi0, c0], method="lm", xtol=1e-15,
                           ftol=1e-15, gtol=1e-15, max_nfev=20000)
    if not result.success:
        raise FitError(f"power-law fit did not converge: {result.message}")
    a, xi, jz_inf = result.x
    if not np.isfinite(xi):
        raise FitError("fitted exponent is not finite")
    return ScalingFit(
        a=float(a),
        xi=float(xi),
        jz_inf=float(jz_inf),
        residual=float(np.linalg.norm(resid(result.x))),
        points=[(int(n), y) for n, y in pts],
    )


def critical_points_by_size(sweep: SweepGrid, h_over_j: float, threshold: float = 0.5,
                            quantity: str = "f_gs") -> list[tuple[int, float]]:
    """J_z^c(N) extracted from one sweep's cross-sections."""
    out = []
    for n in sweep.spec.n_sites:
        jz, vals = sweep.curve(n, h_over_j, quantity)
        out.append((n, extract_critical_point(jz, vals, threshold)))
    return out
