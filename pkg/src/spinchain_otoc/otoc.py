"""Out-of-time-order correlator engine.

Computes F(t) = <W^dag(t) V^dag W(t) V> exactly in the eigenbasis, its
infinite-time saturation value for degenerate spectra, the ground-subspace /
excitation decomposition, windowed time averages, and a Haar-sampled
infinite-temperature estimate.

The saturation value keeps only resonant terms E_beta - E_alpha + E_gamma -
E_gamma' = 0.  With eigenstates grouped into degenerate sets theta and
projectors P_theta, the three structural resonance families are

    term (i)   sum_theta (P_theta c)^dag W^dag Vt W (P_theta b),
    term (ii)  c^dag Wt^dag V^dag Wt b,
    term (iii) sum_theta (P_theta c)^dag (P_theta W P_theta)^dag V^dag
               (P_theta W P_theta) (P_theta b),

where b = V c, Vt = sum_theta P_theta V^dag P_theta, and Wt = sum_theta
P_theta W P_theta are set-dephased operators.  The saturation value is
(i) + (ii) - (iii) plus, optionally, a scanned term (iv): every remaining
set quadruple whose energy mismatch vanishes within tolerance.  Every piece
costs O(D^2) instead of the O(D^4) literal sums.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .chain import (
    ChainSpec,
    LocalOperatorSpec,
    PauliKind,
    build_local_operator,
)
from .errors import DomainError, ResourceBudgetError
from .spectral import (
    DegeneratePartition,
    EigenSystem,
    OperatorMatrix,
    singleton_partition,
    to_eigenbasis,
    window_tolerance,
)

NORM_TOL = 1e-9
_TIME_CHUNK = 256
_COLUMN_CHUNK = 128


class InitialStateKind(str, Enum):
    GROUND_STATE = "ground_state"
    GROUND_SET_MEMBER = "ground_set_member"
    HAAR_RANDOM = "haar_random"


@dataclass(frozen=True)
class InitialState:
    kind: InitialStateKind = InitialStateKind.GROUND_STATE
    member: int = 0
    seed: Optional[int] = None

    @classmethod
    def ground(cls) -> "InitialState":
        return cls(InitialStateKind.GROUND_STATE)

    @classmethod
    def ground_member(cls, member: int) -> "InitialState":
        return cls(InitialStateKind.GROUND_SET_MEMBER, member=member)

    @classmethod
    def haar(cls, seed: int) -> "InitialState":
        return cls(InitialStateKind.HAAR_RANDOM, seed=seed)


class TermIVMode(str, Enum):
    ASSUME_ABSENT = "assume_absent"
    SCAN = "scan"


class ToleranceMode(str, Enum):
    AUTO = "auto"  # eigensystem default: resolves only true degeneracies
    WINDOW = "window"  # pi/(2T): resolves what an average over T can resolve


@dataclass(frozen=True)
class TimeGrid:
    t_max: float = 50.0
    n_samples: int = 2000

    def __post_init__(self):
        if not self.t_max > 0:
            raise DomainError(f"t_max must be positive, got {self.t_max}")
        if self.n_samples < 2:
            raise DomainError(f"n_samples must be >= 2, got {self.n_samples}")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_samples)


@dataclass(frozen=True)
class OtocConfig:
    """What to measure: operators, initial state, grids, tolerances."""

    w_op: Optional[LocalOperatorSpec] = None  # default: w_kind at the bulk site
    v_op: Optional[LocalOperatorSpec] = None  # default: same as w_op
    w_kind: PauliKind = PauliKind.SIGMA_Z
    initial_state: InitialState = field(default_factory=InitialState.ground)
    time_grid: TimeGrid = field(default_factory=TimeGrid)
    average_window: Optional[float] = None  # T; default t_max
    tolerance_mode: ToleranceMode = ToleranceMode.AUTO
    term_iv_mode: TermIVMode = TermIVMode.ASSUME_ABSENT
    quad_budget: int = 200_000

    def __post_init__(self):
        object.__setattr__(self, "tolerance_mode", ToleranceMode(self.tolerance_mode))
        object.__setattr__(self, "term_iv_mode", TermIVMode(self.term_iv_mode))
        object.__setattr__(self, "w_kind", PauliKind(self.w_kind))
        if self.average_window is not None:
            if not self.average_window > 0:
                raise DomainError("average window must be positive")
            if self.average_window > self.time_grid.t_max + 1e-12:
                raise DomainError("average window exceeds the time grid")
        if self.tolerance_mode is ToleranceMode.WINDOW and self.window is None:
            raise DomainError("window tolerance mode needs average_window")

    @property
    def window(self) -> Optional[float]:
        return self.average_window

    def resolved_w(self, chain: ChainSpec) -> LocalOperatorSpec:
        return self.w_op or LocalOperatorSpec(self.w_kind, chain.bulk_site)

    def resolved_v(self, chain: ChainSpec) -> LocalOperatorSpec:
        return self.v_op or self.resolved_w(chain)


@dataclass
class TimeSeries:
    times: np.ndarray
    values: np.ndarray  # complex F(t)


@dataclass
class WindowAverage:
    value: complex
    window: float
    re_min: float
    re_max: float


@dataclass
class OtocReport:
    """Saturation value, its decomposition, and full provenance."""

    f_saturation: complex
    f_gs: complex
    f_ex: complex
    terms: dict[str, complex]
    metadata: dict
    time_series: Optional[TimeSeries] = None
    f_time_average: Optional[complex] = None


def operators_for(es: EigenSystem, config: OtocConfig) -> tuple[OperatorMatrix, OperatorMatrix]:
    """W and V in the eigenbasis (shared object when the specs coincide)."""
    w_spec = config.resolved_w(es.chain)
    v_spec = config.resolved_v(es.chain)
    w = to_eigenbasis(build_local_operator(es.chain, w_spec), es)
    v = w if v_spec == w_spec else to_eigenbasis(build_local_operator(es.chain, v_spec), es)
    return w, v


def select_partition(es: EigenSystem, config: OtocConfig) -> DegeneratePartition:
    if config.tolerance_mode is ToleranceMode.WINDOW:
        # width-capped: a window T resolves pairs further apart than pi/(2T),
        # so no set may span more than that
        return es.partition_for(window_tolerance(config.window), method="width")
    return es.partition


def initial_coefficients(es: EigenSystem, config: OtocConfig) -> tuple[np.ndarray, dict]:
    """Eigenbasis coefficients of the initial state plus selection metadata.

    Ground-set selection always resolves true degeneracies (the eigensystem's
    own partition), independent of any window-mode grouping.
    """
    state = config.initial_state
    if state.kind is InitialStateKind.GROUND_STATE:
        g = es.ground_member_index(es.partition)
        c = np.zeros(es.dimension)
        c[g] = 1.0
        return c, {"initial_state": "ground_state", "initial_member": g}
    if state.kind is InitialStateKind.GROUND_SET_MEMBER:
        ground = es.partition.indices(0)
        if state.member < 0 or state.member >= len(ground):
            raise DomainError(
                f"ground set has {len(ground)} members, no member {state.member}"
            )
        g = int(ground[state.member])
        c = np.zeros(es.dimension)
        c[g] = 1.0
        return c, {"initial_state": "ground_set_member", "initial_member": g}
    if state.seed is None:
        raise DomainError("haar_random initial state needs a seed")
    rng = np.random.default_rng(state.seed)
    c = es.to_eigen(haar_configuration_state(rng, es.chain.dimension))
    return c, {"initial_state": "haar_random", "seed": state.seed}


def haar_configuration_state(rng: np.random.Generator, dimension: int) -> np.ndarray:
    """Normalized vector of iid complex-normal amplitudes: a Haar-random state."""
    x = rng.standard_normal(dimension) + 1j * rng.standard_normal(dimension)
    return x / np.linalg.norm(x)


def otoc_dynamics(es: EigenSystem, config: OtocConfig) -> TimeSeries:
    """F(t) on the configured grid, by phase-multiplying eigenbasis coefficients.

    F(t) = (W(t) c)^dag V^dag (W(t) b) with b = V c and W(t)_{ag} =
    e^{i(E_a - E_g)t} W_{ag}; three block products per time chunk, no matrix
    exponentials.
    """
    w, v = operators_for(es, config)
    c, _ = initial_coefficients(es, config)
    if abs(np.linalg.norm(c) - 1.0) > NORM_TOL:
        raise DomainError("initial state is not normalized")
    b = v.matvec(c)
    times = config.time_grid.times
    values = np.empty(len(times), dtype=np.complex128)
    energies = es.energies
    for start in range(0, len(times), _TIME_CHUNK):
        t = times[start:start + _TIME_CHUNK]
        phase = np.exp(-1j * energies[:, None] * t[None, :])
        wc = np.conj(phase) * w.matmat(phase * c[:, None])
        wb = np.conj(phase) * w.matmat(phase * b[:, None])
        values[start:start + _TIME_CHUNK] = np.sum(
            np.conj(wc) * v.matmat(wb, dagger=True), axis=0
        )
    return TimeSeries(times=times, values=values)


def time_average(series: TimeSeries, window: float) -> WindowAverage:
    """Trapezoidal mean of F over [0, window], with the oscillation envelope."""
    if not window > 0:
        raise DomainError("window must be positive")
    if window > series.times[-1] + 1e-12:
        raise DomainError(
            f"window {window} exceeds sampled range {series.times[-1]}"
        )
    t = series.times
    f = series.values
    inside = t <= window
    tw = t[inside]
    fw = f[inside]
    if tw[-1] < window:  # close the window with an interpolated endpoint
        f_end = np.interp(window, t, f.real) + 1j * np.interp(window, t, f.imag)
        tw = np.append(tw, window)
        fw = np.append(fw, f_end)
    mean = np.trapezoid(fw, tw) / window
    return WindowAverage(
        value=complex(mean),
        window=float(window),
        re_min=float(fw.real.min()),
        re_max=float(fw.real.max()),
    )


def _active_sets(partition: DegeneratePartition, c: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sets where both c and b have support: the only theta contributing to (i)."""
    sets_c = np.unique(partition.set_of[np.nonzero(c)[0]])
    sets_b = np.unique(partition.set_of[np.nonzero(b)[0]])
    return np.intersect1d(sets_c, sets_b, assume_unique=True)


def _term_i(w: OperatorMatrix, v: OperatorMatrix, partition: DegeneratePartition,
            c: np.ndarray, b: np.ndarray) -> complex:
    active = _active_sets(partition, c, b)
    total = 0.0 + 0.0j
    d = len(c)
    for start in range(0, len(active), _COLUMN_CHUNK):
        chunk = active[start:start + _COLUMN_CHUNK]
        cc = np.zeros((d, len(chunk)), dtype=c.dtype)
        bb = np.zeros((d, len(chunk)), dtype=b.dtype)
        for col, k in enumerate(chunk):
            sl = partition.slice_of(int(k))
            cc[sl, col] = c[sl]
            bb[sl, col] = b[sl]
        yc = w.matmat(cc)
        yb = w.matmat(bb)
        total += complex(np.sum(np.conj(yc) * v.dephased_matmat(yb, partition, dagger=True)))
    return total


def _term_iv_scan(es: EigenSystem, w: OperatorMatrix, v: OperatorMatrix,
                  partition: DegeneratePartition, c: np.ndarray, b: np.ndarray,
                  budget: int) -> tuple[complex, int]:
    """Accidental resonances E_theta' - E_theta + E_phi - E_phi' = 0 beyond the
    structural families: every set quadruple matched within the partition
    tolerance except the (theta=theta', phi=phi') and (theta=phi,
    theta'=phi') patterns, which terms (i)-(iii) already count.  This includes
    both four-distinct-set resonances and three-set arithmetic ones
    (2 E_theta = E_theta' + E_phi and alike)."""
    se = partition.set_energies
    tol = max(partition.tol, 1e-12)
    sets_c = np.unique(partition.set_of[np.nonzero(c)[0]])
    sets_b = np.unique(partition.set_of[np.nonzero(b)[0]])
    wc_cache: dict[int, np.ndarray] = {}
    wb_cache: dict[int, np.ndarray] = {}

    def w_masked(vec: np.ndarray, k: int, cache: dict[int, np.ndarray]) -> np.ndarray:
        if k not in cache:
            masked = np.zeros_like(vec)
            sl = partition.slice_of(k)
            masked[sl] = vec[sl]
            cache[k] = w.matvec(masked)
        return cache[k]

    total = 0.0 + 0.0j
    examined = 0
    # adjacent distinct sets sit more than tol apart, so theta = theta' (and
    # phi = phi') can never satisfy the off-pattern resonance; skip upfront
    for theta in sets_c:
        for theta_p in sets_b:
            if theta_p == theta:
                continue
            d_target = se[theta_p] - se[theta]
            lo = np.searchsorted(se, se + d_target - tol, side="left")
            hi = np.searchsorted(se, se + d_target + tol, side="right")
            for phi in range(partition.n_sets):
                for phi_p in range(lo[phi], hi[phi]):
                    if phi == theta and phi_p == theta_p:
                        continue  # scenario (ii), already counted
                    if phi == phi_p:
                        continue  # scenario (i) shape; unreachable but cheap
                    examined += 1
                    if examined > budget:
                        raise ResourceBudgetError(
                            f"resonance scan exceeded budget of {budget} quadruples",
                            count=examined,
                        )
                    u = w_masked(c, int(theta), wc_cache)[partition.slice_of(phi)]
                    r = w_masked(b, int(theta_p), wb_cache)[partition.slice_of(phi_p)]
                    vblock = v.subblock(
                        partition.indices(phi), partition.indices(phi_p), dagger=True
                    )
                    total += complex(np.conj(u) @ (vblock @ r))
    return total, examined


def _saturation(es: EigenSystem, config: OtocConfig,
                partition: DegeneratePartition) -> OtocReport:
    w, v = operators_for(es, config)
    c, state_meta = initial_coefficients(es, config)
    if abs(np.linalg.norm(c) - 1.0) > NORM_TOL:
        raise DomainError("initial state is not normalized")
    b = v.matvec(c)

    wt_c = w.dephased_matvec(c, partition)
    wt_b = w.dephased_matvec(b, partition)
    term_i = _term_i(w, v, partition, c, b)
    term_ii = complex(np.vdot(wt_c, v.matvec(wt_b, dagger=True)))
    term_iii = complex(np.vdot(wt_c, v.dephased_matvec(wt_b, partition, dagger=True)))
    if config.term_iv_mode is TermIVMode.SCAN:
        term_iv, examined = _term_iv_scan(es, w, v, partition, c, b, config.quad_budget)
    else:
        term_iv, examined = 0.0 + 0.0j, 0

    ground = partition.indices(0)
    gsl = partition.slice_of(0)
    wg = w.subblock(ground, ground)
    vg = v.subblock(ground, ground, dagger=True)
    f_gs = complex(np.conj(wg @ c[gsl]) @ (vg @ (wg @ b[gsl])))

    f_sat = term_i + term_ii - term_iii + term_iv
    chain = es.chain
    metadata = {
        "n_sites": chain.n_sites,
        "jz_over_j": chain.jz_over_j,
        "h_over_j": chain.h_over_j,
        "boundary": chain.boundary.value,
        "w_op": {"kind": config.resolved_w(chain).kind.value,
                 "site": config.resolved_w(chain).site},
        "v_op": {"kind": config.resolved_v(chain).kind.value,
                 "site": config.resolved_v(chain).site},
        "tolerance_mode": config.tolerance_mode.value,
        "tol_deg": partition.tol,
        "window": config.window,
        "term_iv_mode": config.term_iv_mode.value,
        "quadruples_examined": examined,
        "n_degenerate_sets": partition.n_sets,
        "ground_set_size": len(ground),
        **state_meta,
    }
    return OtocReport(
        f_saturation=f_sat,
        f_gs=f_gs,
        f_ex=f_sat - f_gs,
        terms={"i": term_i, "ii": term_ii, "iii": term_iii, "iv": term_iv},
        metadata=metadata,
    )


def saturation_degenerate(es: EigenSystem, config: OtocConfig) -> OtocReport:
    """Infinite-time (or window-resolved) saturation with degenerate sets."""
    return _saturation(es, config, select_partition(es, config))


def saturation_nondegenerate(es: EigenSystem, config: OtocConfig) -> OtocReport:
    """Saturation under the nondegenerate-spectrum assumption (singleton sets)."""
    return _saturation(es, config, singleton_partition(es.energies))


def ground_subspace_term(es: EigenSystem, config: OtocConfig) -> complex:
    """Leading-order saturation term: (W_1^4)_{mm} on the ground set, with m the
    configured initial member."""
    if config.initial_state.kind is InitialStateKind.HAAR_RANDOM:
        raise DomainError("ground-subspace term requires a ground-set initial state")
    partition = select_partition(es, config)
    c, meta = initial_coefficients(es, config)
    ground = partition.indices(0)
    member = meta["initial_member"]
    if member not in ground:
        raise DomainError("initial state is not in the ground set")
    w, _ = operators_for(es, config)
    wg = w.subblock(ground, ground)
    m = int(np.searchsorted(ground, member))
    return complex(np.linalg.matrix_power(wg, 4)[m, m])


@dataclass
class HaarEstimate:
    """Sample statistics of the long-time OTOC over Haar-random initial states."""

    f_mean: complex
    f_stderr: float
    v_expectation_mean: complex
    v_expectation_stderr: float
    n_samples: int
    seed: int
    f_samples: np.ndarray
    v_samples: np.ndarray


def haar_infinite_temperature(es: EigenSystem, config: OtocConfig,
                              n_samples: int) -> HaarEstimate:
    """Long-time OTOC averaged over Haar states: the infinite-temperature proxy."""
    if n_samples < 2:
        raise DomainError(f"need at least 2 Haar samples, got {n_samples}")
    seed = config.initial_state.seed
    if seed is None:
        raise DomainError("Haar estimator needs a seed")
    rng = np.random.default_rng(seed)
    w, v = operators_for(es, config)
    partition = select_partition(es, config)
    f_samples = np.empty(n_samples, dtype=np.complex128)
    v_samples = np.empty(n_samples, dtype=np.complex128)
    for k in range(n_samples):
        c = es.to_eigen(haar_configuration_state(rng, es.chain.dimension))
        b = v.matvec(c)
        v_samples[k] = np.vdot(c, b)
        wt_c = w.dephased_matvec(c, partition)
        wt_b = w.dephased_matvec(b, partition)
        term_i = _term_i(w, v, partition, c, b)
        term_ii = complex(np.vdot(wt_c, v.matvec(wt_b, dagger=True)))
        term_iii = complex(np.vdot(wt_c, v.dephased_matvec(wt_b, partition, dagger=True)))
        f_samples[k] = term_i + term_ii - term_iii

    def stderr(x: np.ndarray) -> float:
        spread = np.sqrt(np.var(x.real, ddof=1) + np.var(x.imag, ddof=1))
        return float(spread / np.sqrt(len(x)))

    return HaarEstimate(
        f_mean=complex(f_samples.mean()),
        f_stderr=stderr(f_samples),
        v_expectation_mean=complex(v_samples.mean()),
        v_expectation_stderr=stderr(v_samples),
        n_samples=n_samples,
        seed=seed,
        f_samples=f_samples,
        v_samples=v_samples,
    )
