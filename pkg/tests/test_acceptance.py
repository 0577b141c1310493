"""Acceptance suite: one test per acceptance criterion, at fixed tolerances.

Run with `pytest tests/test_acceptance.py -v -s` to see one line per criterion.
The heavy N=14 cases carry the `slow` marker but run by default.
"""

import numpy as np
import pytest

from spinchain_otoc import (
    ChainSpec,
    InitialState,
    LocalOperatorSpec,
    OtocConfig,
    TimeGrid,
    build_hamiltonian,
    diagonalize,
    extract_critical_point,
    fit_power_law,
    haar_infinite_temperature,
    otoc_dynamics,
    saturation_degenerate,
    saturation_nondegenerate,
    time_average,
)
from spinchain_otoc.diagnostics import AnsatzVerdict, ansatz_report
from spinchain_otoc.otoc import initial_coefficients, operators_for

from oracles import literal_saturation_terms

WINDOW_SHORT = np.pi / 4 * 10  # short averaging window for cross-sections
WINDOW_LONG = np.pi / 4 * 1e3


def announce(name: str, detail: str) -> None:
    print(f"\nACCEPTANCE {name}: PASS ({detail})")


def build(n, jz, h=0.0, boundary=None):
    return diagonalize(build_hamiltonian(
        ChainSpec(n_sites=n, jz_over_j=jz, h_over_j=h, boundary=boundary)))


@pytest.mark.slow
def test_ferromagnet_nonscrambling():
    """N in {8,10,12,14}, periodic, h=0, Jz=-2: F_sat = 1, F_ex = 0, F(t) = 1."""
    worst_sat = worst_ex = worst_dyn = 0.0
    for n in (8, 10, 12, 14):
        es = build(n, -2.0, boundary="periodic")
        config = OtocConfig(time_grid=TimeGrid(t_max=30.0, n_samples=150))
        report = saturation_degenerate(es, config)
        worst_sat = max(worst_sat, abs(report.f_saturation - 1.0))
        worst_ex = max(worst_ex, abs(report.f_ex))
        series = otoc_dynamics(es, config)
        worst_dyn = max(worst_dyn, float(np.max(np.abs(series.values - 1.0))))
    assert worst_sat <= 1e-10
    assert worst_ex <= 1e-10
    assert worst_dyn <= 1e-10
    announce("ferromagnet non-scrambling",
             f"max|F_sat-1|={worst_sat:.1e}, max|F_ex|={worst_ex:.1e}, "
             f"max|F(t)-1|={worst_dyn:.1e}")


def test_oracle_equivalence():
    """Literal quadruple-sum saturation values match the block evaluation to
    1e-12 at 20 random (Jz, h) points, N in {3, 4, 5}."""
    rng = np.random.default_rng(2718)
    worst = 0.0
    points = 0
    for k in range(20):
        n = int(rng.choice([3, 4, 5]))
        jz = round(float(rng.uniform(-2.5, 4.0)), 6)
        h = round(float(rng.uniform(0.0, 2.5)), 6)
        boundary = "open" if rng.random() < 0.5 else "periodic"
        es = build(n, jz, h, boundary=boundary)
        initial = InitialState.haar(k) if k % 4 == 0 else InitialState.ground()
        cfg = OtocConfig(initial_state=initial)

        w_op, v_op = operators_for(es, cfg)
        d = es.dimension
        w = w_op.subblock(np.arange(d), np.arange(d)).astype(complex)
        c, _ = initial_coefficients(es, cfg)
        b = v_op.matvec(c).astype(complex)

        r_deg = saturation_degenerate(es, cfg)
        lit_deg = literal_saturation_terms(es.partition.set_of, c.astype(complex), b,
                                           w, w.conj().T)
        r_nd = saturation_nondegenerate(es, cfg)
        lit_nd = literal_saturation_terms(np.arange(d), c.astype(complex), b,
                                          w, w.conj().T)
        for key in ("i", "ii", "iii"):
            worst = max(worst, abs(r_deg.terms[key] - lit_deg[key]))
            worst = max(worst, abs(r_nd.terms[key] - lit_nd[key]))
        worst = max(worst, abs(
            r_deg.f_saturation - (lit_deg["i"] + lit_deg["ii"] - lit_deg["iii"])))
        points += 1
    assert points == 20
    assert worst < 1e-12
    announce("oracle equivalence", f"20 points, worst deviation {worst:.1e}")


def test_degenerate_reduces_to_nondegenerate():
    """On spectra without degeneracies the degenerate-set formula reduces to
    the nondegenerate one to 1e-13."""
    rng = np.random.default_rng(1414)
    worst = 0.0
    checked = 0
    while checked < 10:
        jz = round(float(rng.uniform(-2.5, 4.0)), 6)
        h = round(float(rng.uniform(0.1, 2.5)), 6)
        es = build(5, jz, h, boundary="open")
        if es.partition.n_sets != es.dimension:
            continue  # true degeneracy: the reduction claim does not apply
        r_deg = saturation_degenerate(es, OtocConfig())
        r_nd = saturation_nondegenerate(es, OtocConfig())
        worst = max(worst, abs(r_deg.f_saturation - r_nd.f_saturation))
        checked += 1
    assert worst < 1e-13
    announce("degenerate-to-nondegenerate reduction",
             f"10 points, worst deviation {worst:.1e}")


def test_time_average_consistency():
    """N=13 open, h=0, T=20: window-mode saturation predicts the real-time
    average within 0.05 at Jz in {-1, 0.6, 2, 4}."""
    window = 20.0
    diffs = {}
    for jz in (-1.0, 0.6, 2.0, 4.0):
        es = build(13, jz, boundary="open")
        cfg = OtocConfig(time_grid=TimeGrid(t_max=window, n_samples=2001),
                         average_window=window, tolerance_mode="window",
                         term_iv_mode="scan", quad_budget=2_000_000)
        series = otoc_dynamics(es, cfg)
        f_bar = time_average(series, window).value
        report = saturation_degenerate(es, cfg)
        diffs[jz] = abs(f_bar - report.f_saturation)
    assert all(d < 0.05 for d in diffs.values()), diffs
    announce("time-average consistency (T=20/J)",
             ", ".join(f"Jz={jz}: {d:.3f}" for jz, d in diffs.items()))


@pytest.mark.slow
def test_ferromagnet_xy_boundary():
    """The h=0 saturation drop sits at Jz=-1 within one 0.1 grid step for
    N in {8,10,12,14}; at N=14 the 0.3/0.5/0.7 thresholds agree to one step."""
    grid = np.round(np.arange(-1.2, -0.75, 0.1), 10)
    crossings = {}
    n14_curve = None
    for n in (8, 10, 12, 14):
        values = []
        for jz in grid:
            es = build(n, float(jz), boundary="periodic")
            values.append(saturation_degenerate(es, OtocConfig()).f_saturation.real)
        crossings[n] = extract_critical_point(grid, np.array(values), 0.5)
        if n == 14:
            n14_curve = np.array(values)
    assert all(abs(jzc + 1.0) <= 0.1 for jzc in crossings.values()), crossings
    sens = [extract_critical_point(grid, n14_curve, thr) for thr in (0.3, 0.5, 0.7)]
    assert max(sens) - min(sens) < 0.1
    announce("ferromagnet-XY boundary",
             ", ".join(f"N={n}: Jz_c={jzc:+.3f}" for n, jzc in crossings.items())
             + f"; N=14 threshold spread {max(sens) - min(sens):.3f}")


@pytest.mark.slow
def test_quasi_long_range_order_invisibility():
    """sigma_x saturation at Jz=-0.9 decreases with odd N and stays below 0.5;
    even N=14 shows no inter-phase contrast above 0.1 across Jz in [-0.9, 2]."""
    odd_values = []
    for n in (9, 11, 13):
        es = build(n, -0.9, boundary="periodic")
        cfg = OtocConfig(w_op=LocalOperatorSpec("sigma_x", n // 2),
                         time_grid=TimeGrid(t_max=WINDOW_LONG),
                         average_window=WINDOW_LONG, tolerance_mode="window")
        odd_values.append(abs(saturation_degenerate(es, cfg).f_saturation))
    assert all(v < 0.5 for v in odd_values)
    assert odd_values[0] > odd_values[1] > odd_values[2]

    even_values = []
    for jz in (-0.9, 0.1, 1.0, 2.0):
        es = build(14, jz, boundary="periodic")
        cfg = OtocConfig(w_op=LocalOperatorSpec("sigma_x", 7),
                         time_grid=TimeGrid(t_max=WINDOW_LONG),
                         average_window=WINDOW_LONG, tolerance_mode="window")
        even_values.append(saturation_degenerate(es, cfg).f_saturation.real)
    contrast = max(even_values) - min(even_values)
    assert contrast <= 0.1
    announce("quasi-long-range order invisibility",
             f"odd |F|: {odd_values[0]:.3f} > {odd_values[1]:.3f} > {odd_values[2]:.3f}; "
             f"N=14 contrast {contrast:.1e}")


def test_kramers_degeneracy():
    """Odd N, open, Jz=3, h=0: the two lowest levels are degenerate."""
    gaps = {}
    for n in (9, 11, 13):
        es = build(n, 3.0, boundary="open")
        gaps[n] = float(es.energies[1] - es.energies[0])
        assert gaps[n] < es.tol_deg
        assert es.partition.size(0) >= 2
    announce("Kramers degeneracy",
             ", ".join(f"N={n}: gap={g:.1e}" for n, g in gaps.items()))


@pytest.mark.slow
def test_antiferromagnet_correction_decay():
    """N=14 periodic, h=0: the excitation correction shrinks from Jz=1.5 to
    Jz=5, and the ground-subspace term approaches the full saturation value.

    The window must leave the Neel doublet unresolved at both points; the
    Jz=1.5 splitting is 0.74, so T=2 (tolerance pi/4) is used.
    """
    window = 2.0
    reports = {}
    for jz in (1.5, 5.0):
        es = build(14, jz, boundary="periodic")
        cfg = OtocConfig(time_grid=TimeGrid(t_max=window), average_window=window,
                         tolerance_mode="window")
        reports[jz] = saturation_degenerate(es, cfg)
    ex_15 = abs(reports[1.5].f_ex)
    ex_50 = abs(reports[5.0].f_ex)
    assert ex_50 < ex_15
    rel_15 = ex_15 / abs(reports[1.5].f_saturation)
    rel_50 = ex_50 / abs(reports[5.0].f_saturation)
    assert rel_50 < rel_15

    # deep-antiferromagnet agreement at the short cross-section window
    es = build(14, 5.0, boundary="periodic")
    cfg = OtocConfig(time_grid=TimeGrid(t_max=WINDOW_SHORT),
                     average_window=WINDOW_SHORT, tolerance_mode="window")
    report = saturation_degenerate(es, cfg)
    agreement = abs(report.f_gs - report.f_saturation)
    assert agreement < 0.05
    announce("antiferromagnet correction decay",
             f"|F_ex|: {ex_15:.3f} (Jz=1.5) -> {ex_50:.3f} (Jz=5); "
             f"|F_gs - F_sat| at Jz=5, short window: {agreement:.4f}")


def test_scaling_fitter_fixture():
    """Noiseless a N^-0.98 + 1.02 data: parameters recovered to 1e-3."""
    ns = np.arange(8, 61, 2)
    ys = 0.7 * ns.astype(float) ** (-0.98) + 1.02
    fit = fit_power_law(list(zip(ns, ys)))
    assert abs(fit.xi + 0.98) < 1e-3
    assert abs(fit.jz_inf - 1.02) < 1e-3
    announce("scaling-fitter fixture",
             f"xi={fit.xi:+.6f}, Jz_inf={fit.jz_inf:.6f}, residual={fit.residual:.1e}")


def test_haar_typicality():
    """Traceless sigma_z over Haar states: the mean concentrates near zero and
    the spread shrinks from N=8 to N=10 (D=2^10)."""
    estimates = {}
    for n in (8, 10):
        es = build(n, 0.6, 0.2, boundary="open")
        cfg = OtocConfig(initial_state=InitialState.haar(505))
        estimates[n] = haar_infinite_temperature(es, cfg, n_samples=50)
    d = 2**10
    bound = 5.0 / np.sqrt(50 * d)
    assert abs(estimates[10].v_expectation_mean) < bound
    spread = {n: float(np.std(np.abs(est.v_samples)))
              for n, est in estimates.items()}
    assert spread[10] < spread[8]
    announce("Haar typicality",
             f"|mean <V>|={abs(estimates[10].v_expectation_mean):.2e} < {bound:.2e}; "
             f"spread {spread[8]:.3e} -> {spread[10]:.3e}")


def test_diagnostics_concordance():
    """Ansatz verdicts at N=13, h=0: sigma_z ordered at Jz in {-2, 5} and
    disordered at 0.1; sigma_x disordered everywhere tested."""
    verdicts = {}
    for jz in (-2.0, 5.0, 0.1):
        es = build(13, jz, boundary="open")
        for kind in ("sigma_z", "sigma_x"):
            cfg = OtocConfig(w_op=LocalOperatorSpec(kind, 6))
            w, _ = operators_for(es, cfg)
            verdicts[(jz, kind)] = ansatz_report(w, es).verdict
    assert verdicts[(-2.0, "sigma_z")] is AnsatzVerdict.ORDERED_LIKE
    assert verdicts[(5.0, "sigma_z")] is AnsatzVerdict.ORDERED_LIKE
    assert verdicts[(0.1, "sigma_z")] is AnsatzVerdict.DISORDERED_LIKE
    for jz in (-2.0, 5.0, 0.1):
        assert verdicts[(jz, "sigma_x")] is AnsatzVerdict.DISORDERED_LIKE
    announce("diagnostics concordance",
             "; ".join(f"Jz={jz} {k.split('_')[1]}: {v.value}"
                       for (jz, k), v in verdicts.items()))
