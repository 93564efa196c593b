"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are printed even
when output is captured). Tolerances are the ones the criteria state.
"""
import os
import time

import numpy as np

from stochsirs import (NoiseIntensities, Scheme, SimConfig, State,
                       check_dfe_bound, check_extinction, check_stationary, equilibria,
                       run_ensemble, simulate)
from stochsirs.config import load_runspec
from stochsirs.core import baseline_params, drift
from stochsirs.ensemble import boundedness_check, stationary_distance
from stochsirs.integrate import strong_convergence

WORKERS = os.cpu_count() or 1


def verdict(capsys, number, checks):
    """Print the criterion line plus one line per sub-check, then assert all."""
    ok = all(passed for _, passed in checks)
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}")
        for text, passed in checks:
            print(f"    [{'ok' if passed else 'FAIL'}] {text}")
    failed = [text for text, passed in checks if not passed]
    assert ok, "; ".join(failed)


def test_criterion_1_r0(capsys):
    from mpmath import mp, mpf
    checks = []
    for mu, expected in ((0.05, 0.89375), (0.006, 13.75)):
        p = baseline_params(mu=mu)
        with mp.workdps(50):
            oracle = (mpf("0.013") * mpf("0.33")
                      / (mpf(repr(mu)) * (mpf("0.006") + mpf(repr(mu)) + mpf("0.04"))))
        rel = abs(p.r0 - float(oracle)) / float(oracle)
        checks.append((f"mu={mu}: R0={p.r0!r}, relative error vs 50-digit oracle {rel:.1e} "
                       "(need <= 1e-12)", rel <= 1e-12))
        checks.append((f"mu={mu}: R0 matches {expected} to 1e-12",
                       abs(p.r0 - expected) <= 1e-12 * expected))
    verdict(capsys, 1, checks)


def test_criterion_2_equilibria(capsys):
    p = baseline_params(mu=0.006)
    eq = equilibria(p)
    stated = State(4.0, 45.7327, 63.0796)
    res_ee = np.abs(drift(eq.ee, p))
    res_stated = np.abs(drift(stated, p))
    res_dfe = np.abs(drift(eq.dfe, p))
    close = np.allclose(eq.ee.as_array(), stated.as_array(), rtol=1e-5)
    checks = [
        (f"computed EE ({eq.ee.x:.6g}, {eq.ee.y:.6g}, {eq.ee.z:.6g}) equals stated "
         f"(4.0, 45.7327, 63.0796)", close),
        (f"stated EE drift residual {res_stated.max():.3g} per component (need < 1e-10)",
         bool(np.all(res_stated < 1e-10))),
        (f"computed EE drift residual {res_ee.max():.1e} (need < 1e-10)",
         bool(np.all(res_ee < 1e-10))),
        (f"DFE drift residual {res_dfe.max():.1e} (need < 1e-12)", bool(np.all(res_dfe < 1e-12))),
    ]
    verdict(capsys, 2, checks)


def _det_run(p, scheme, dt, t_final):
    return simulate(SimConfig(dt=dt, t_final=t_final, scheme=scheme), p, NoiseIntensities())


def test_criterion_3_deterministic_regimes(capsys):
    t0 = time.perf_counter()
    low, high = baseline_params(mu=0.05), baseline_params(mu=0.006)
    ee = equilibria(high).ee.as_array()
    checks = []
    for scheme in (Scheme.MILSTEIN_LITERAL, Scheme.RK4):
        for dt in (0.1, 0.05):
            a = _det_run(low, scheme, dt, 2000.0)
            tail = a.y[a.times >= 1000.0]
            mono = bool(np.all(np.diff(tail) <= 0))
            checks.append((f"{scheme.value} dt={dt}: mu=0.05 Y(2000)={a.final.y:.3g} < 1e-4, "
                           f"tail monotone={mono}", a.final.y < 1e-4 and mono))
            b = _det_run(high, scheme, dt, 4000.0)
            rel = float(np.max(np.abs(b.final.as_array() - ee) / ee))
            checks.append((f"{scheme.value} dt={dt}: mu=0.006 max relative distance to EE at "
                           f"T=4000 {rel:.2e} < 0.01", rel < 0.01))
    elapsed = time.perf_counter() - t0
    checks.append((f"runtime {elapsed:.2f} s < 5 s", elapsed < 5))
    verdict(capsys, 3, checks)


def test_criterion_4_convergence(capsys):
    t0 = time.perf_counter()
    p = baseline_params(mu=0.006)
    n = NoiseIntensities(0.01, 0.02, 0.03, 0.01)
    ee = equilibria(p).ee
    dts = [0.1, 0.05, 0.025, 0.0125]
    em = strong_convergence(Scheme.EULER_MARUYAMA, p, n, ee, 2.0, dts, 0.003125, 64)
    mil = strong_convergence(Scheme.MILSTEIN_CORRECTED, p, n, ee, 2.0, dts, 0.003125, 64)
    elapsed = time.perf_counter() - t0
    checks = [
        (f"Euler-Maruyama order {em.order:.3f} in 0.5 ± 0.25", abs(em.order - 0.5) <= 0.25),
        (f"corrected Milstein order {mil.order:.3f} in 1.0 ± 0.25", abs(mil.order - 1.0) <= 0.25),
        (f"runtime {elapsed:.1f} s < 60 s", elapsed < 60),
    ]
    verdict(capsys, 4, checks)


def test_criterion_5_dfe_bound(capsys):
    t0 = time.perf_counter()
    spec = load_runspec(preset="dfe-bound", overrides={"sim.scheme": "milstein-literal"})
    assert spec.noise.as_tuple() == (0.01, 0.02, 0.03, 0.0)
    assert spec.ensemble.n_paths == 100 and spec.sim.t_final == 20000 and spec.sim.dt == 0.1
    rep = check_dfe_bound(spec.params, spec.noise)
    stats = run_ensemble(spec.ensemble, spec.params, spec.noise, workers=WORKERS)
    thr = 0.17494 * 1.1
    elapsed = time.perf_counter() - t0
    checks = [
        (f"checker bound {rep.bound_value:.6g} ≈ 0.17494", abs(rep.bound_value - 0.17494) < 5e-6),
        (f"dfe_ms_average {stats.dfe_ms_average:.4g} ≤ 0.17494 × 1.1 = {thr:.5g}",
         stats.dfe_ms_average <= thr),
        (f"runtime {elapsed:.1f} s < 120 s", elapsed < 120),
    ]
    verdict(capsys, 5, checks)


def test_criterion_6_extinction(capsys):
    t0 = time.perf_counter()
    checks = []
    for scheme in ("milstein-corrected", "milstein-literal"):
        spec = load_runspec(preset="extinction", overrides={"sim.scheme": scheme})
        assert spec.noise.as_tuple() == (0.001, 0.02, 0.001, 0.1)
        assert spec.ensemble.n_paths == 200 and spec.sim.t_final == 2000
        rep = check_extinction(spec.params, spec.noise)
        stats = run_ensemble(spec.ensemble, spec.params, spec.noise, workers=WORKERS)
        if scheme == "milstein-corrected":
            checks.append((f"exponent bound {rep.exponent_bound:.6g} = -0.04375",
                           abs(rep.exponent_bound + 0.04375) < 1e-12))
        checks.append((f"{scheme}: lyapunov mean {stats.lyapunov_mean:.4g} "
                       f"(± {stats.lyapunov_half_width:.2g}) ≤ -0.02",
                       stats.lyapunov_mean <= -0.02))
        checks.append((f"{scheme}: extinction_fraction {stats.extinction_fraction:.3f} ≥ 0.95",
                       stats.extinction_fraction >= 0.95))
    elapsed = time.perf_counter() - t0
    checks.append((f"runtime {elapsed:.1f} s < 60 s", elapsed < 60))
    verdict(capsys, 6, checks)


def test_criterion_7_stationary(capsys):
    t0 = time.perf_counter()
    spec = load_runspec(preset="stationary")
    assert spec.noise.as_tuple() == (0.001,) * 4
    assert spec.ensemble.n_paths == 100 and spec.ensemble.burn_in == 2000
    rep = check_stationary(spec.params, spec.noise)
    stats = run_ensemble(spec.ensemble, spec.params, spec.noise, workers=WORKERS)
    tv = stationary_distance(stats)
    drift_ = stats.ee_window_drift
    elapsed = time.perf_counter() - t0
    checks = [
        (f"C = {rep.c_const:.5g} ≈ 0.00892", abs(rep.c_const - 0.00892) <= 0.5e-5),
        (f"min(D1 X*², D2 Y*², D3 Z*²) = {rep.bound:.5g} ≈ 0.04697",
         abs(rep.bound - 0.04697) <= 0.5e-5),
        (f"holds = {rep.holds} with 0 < C < bound", rep.holds and 0 < rep.c_const < rep.bound),
        (f"two-window TV distance {tv:.4g} < 0.1 (box {stats.box[0]:.3g} x {stats.box[1]:.3g} x "
         f"{stats.box[2]:.3g}, {spec.ensemble.histogram_bins} bins per axis)", tv < 0.1),
        (f"ee_ms_average {stats.ee_ms_average:.4g}; window drift {drift_:.2%} ≤ 5%",
         drift_ <= 0.05),
        (f"runtime {elapsed:.1f} s < 300 s", elapsed < 300),
    ]
    verdict(capsys, 7, checks)


FIGURE_PRESETS = ["fig1", "fig2"] + [f"fig{k}{v}" for k in range(3, 9) for v in "ab"]


def _boundedness_sweep(scheme=None):
    rows = []
    for name in FIGURE_PRESETS:
        over = {"sim.scheme": scheme} if scheme else {}
        spec = load_runspec(preset=name, overrides=over, need_ensemble=True)
        stats = run_ensemble(spec.ensemble, spec.params, spec.noise, workers=WORKERS)
        rows.append((name, spec.ensemble.n_paths, stats, boundedness_check(stats)))
    return rows


def test_criterion_8_boundedness(capsys):
    t0 = time.perf_counter()
    checks = []
    # as configured: figure presets use the literal Milstein variant
    for name, n_paths, stats, v in _boundedness_sweep():
        checks.append((f"{name} ({n_paths} paths): n_min {stats.n_min:.4g} > 0, "
                       f"n_max {stats.n_max:.4g} < {v.threshold:g}, "
                       f"aborts {len(stats.aborted_paths)}",
                       v.passed and not stats.aborted_paths and n_paths == 200))
    elapsed = time.perf_counter() - t0
    checks.append((f"runtime {elapsed:.1f} s < 300 s", elapsed < 300))
    # supplementary, not part of the verdict: the SDE-consistent scheme
    sup = _boundedness_sweep("milstein-corrected")
    with capsys.disabled():
        worst = max(sup, key=lambda r: r[2].n_max)
        print(f"\n    (info) milstein-corrected on the same presets: all bounded = "
              f"{all(r[3].passed and not r[2].aborted_paths for r in sup)}, "
              f"largest n_max {worst[2].n_max:.4g} ({worst[0]})")
    verdict(capsys, 8, checks)


def test_criterion_9_property_suites(capsys):
    import test_properties as props
    t0 = time.perf_counter()
    checks = []
    for name in ("test_determinism", "test_zero_noise_schemes_agree",
                 "test_sigma4_column_cancels_in_total", "test_sigma4_terms_cancel_in_total_step",
                 "test_r0_monotone", "test_extinction_bound_monotone"):
        fn = getattr(props, name)
        try:
            fn()
            checks.append((f"{name}: 1000 draws", True))
        except Exception as exc:  # report, then fail below
            checks.append((f"{name}: {type(exc).__name__}: {exc}", False))
    elapsed = time.perf_counter() - t0
    checks.append((f"runtime {elapsed:.1f} s < 30 s", elapsed < 30))
    assert props.DRAWS.max_examples >= 1000
    verdict(capsys, 9, checks)
