"""Command-line front end: ``check``, ``simulate``, ``ensemble`` and ``sweep``.

Exit codes: 0 success, 2 configuration error, 3 runtime abort. Condition
verdicts are reported in the output and never change the exit code.
"""
from __future__ import annotations

import argparse
import io
import math
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .conditions import (check_dfe_bound, check_extinction, check_stationary,
                         ellipticity_kappa, extinction_sigma4_threshold)
from .config import ConfigError, PRESETS, RunSpec, load_runspec, resolve_axis
from .core import equilibria
from .ensemble import (EmptyWindowError, EnsembleStats, boundedness_check, dfe_bound_check,
                       run_ensemble, stationary_distance, write_histograms, write_paths_csv)
from .integrate import Scheme, TrajectoryAborted, simulate, write_trajectory_csv

OUT_ENV = "STOCHSIRS_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_ABORT = 0, 2, 3
ABORT_FRACTION = 0.01
TV_THRESHOLD = 0.1
DRIFT_THRESHOLD = 0.05
EXTINCTION_FRACTION = 0.95


def _g(v: Optional[float]) -> str:
    """Short human-readable number for report lines."""
    if v is None:
        return "n/a"
    return "inf" if math.isinf(v) else f"{v:.6g}"


def _r(v) -> str:
    """Exact (round-trip) value for key = value records."""
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(float(v)) if isinstance(v, float) else str(v)


def _yn(b: bool) -> str:
    return "true" if b else "false"


def _pf(b: bool) -> str:
    return "PASS" if b else "FAIL"


# reports ------------------------------------------------------------------------

def check_report(spec: RunSpec) -> str:
    p, n = spec.params, spec.noise
    eq = equilibria(p)
    st = check_stationary(p, n)
    dfe = check_dfe_bound(p, n)
    ext = check_extinction(p, n)
    lines = [f"R0 = {_g(eq.r0)}",
             f"DFE: ({_g(eq.dfe.x)}, {_g(eq.dfe.y)}, {_g(eq.dfe.z)})"]
    if eq.ee is None:
        lines.append("EE: absent")
    else:
        lines.append(f"EE: ({_g(eq.ee.x)}, {_g(eq.ee.y)}, {_g(eq.ee.z)})")
    if st.ee_defined:
        lines.append(f"stationary distribution condition: holds = {_yn(st.holds)} "
                     f"(C = {_g(st.c_const)}, bound = {_g(st.bound)})")
        lines.append(f"kappa = {_g(ellipticity_kappa(n, st.ee))}")
    else:
        lines.append("stationary distribution condition: holds = false (EE undefined)")
    lines.append(f"DFE bound hypotheses: hold = {_yn(dfe.hypotheses_hold)}, "
                 f"bound = {_g(dfe.bound_value)}"
                 + (", DFE stochastically stable" if dfe.dfe_stochastically_stable else ""))
    lines.append(f"extinction predicted: {_yn(ext.predicts_extinction)}, "
                 f"exponent bound {_g(ext.exponent_bound)}")
    lines.append("")
    rec = [("r0", eq.r0), ("dfe.x", eq.dfe.x), ("dfe.y", eq.dfe.y), ("dfe.z", eq.dfe.z),
           ("ee.present", eq.ee is not None)]
    if eq.ee is not None:
        rec += [("ee.x", eq.ee.x), ("ee.y", eq.ee.y), ("ee.z", eq.ee.z)]
    rec += [("stationary.holds", st.holds), ("stationary.d1", st.d1), ("stationary.d2", st.d2),
            ("stationary.d3", st.d3), ("stationary.c", st.c_const),
            ("stationary.bound", st.bound),
            ("dfe_bound.hypotheses_hold", dfe.hypotheses_hold),
            ("dfe_bound.margins", None), ("dfe_bound.c_min", dfe.c_min),
            ("dfe_bound.value", dfe.bound_value),
            ("dfe_bound.stochastically_stable", dfe.dfe_stochastically_stable),
            ("extinction.lhs", ext.lhs), ("extinction.rhs", ext.rhs),
            ("extinction.exponent_bound", ext.exponent_bound),
            ("extinction.predicted", ext.predicts_extinction)]
    for k, v in rec:
        if k == "dfe_bound.margins":
            lines.append(f"{k} = {', '.join(_r(m) for m in dfe.margins)}")
        else:
            lines.append(f"{k} = {_r(v)}")
    return "\n".join(lines) + "\n"


def ensemble_verdicts(spec: RunSpec, stats: EnsembleStats) -> list[str]:
    p, n = spec.params, spec.noise
    out = []
    b = boundedness_check(stats)
    out.append(f"boundedness 0 < N < {_g(b.threshold)} (n_min {_g(stats.n_min)}, "
               f"n_max {_g(stats.n_max)}): {_pf(b.passed)}")
    dfe = check_dfe_bound(p, n)
    v = dfe_bound_check(stats, dfe)
    if v.status != "inapplicable":
        detail = v.detail.replace(" x ", " × ")
        out.append(f"dfe_ms_average ≤ {v.threshold:.4g} ({detail}): {_pf(v.passed)}")
    ext = check_extinction(p, n)
    if ext.predicts_extinction:
        out.append(f"extinction_fraction ≥ {EXTINCTION_FRACTION:g}: "
                   f"{_pf(stats.extinction_fraction >= EXTINCTION_FRACTION)}")
        out.append(f"lyapunov_mean ≤ {_g(ext.exponent_bound)}: "
                   f"{_pf(stats.lyapunov_mean <= ext.exponent_bound)}")
    st = check_stationary(p, n)
    if st.holds:
        try:
            tv = stationary_distance(stats)
            out.append(f"stationary TV distance < {TV_THRESHOLD:g}: {_pf(tv < TV_THRESHOLD)}")
        except EmptyWindowError:
            out.append(f"stationary TV distance < {TV_THRESHOLD:g}: FAIL (empty window)")
        drift = stats.ee_window_drift
        out.append(f"ee_ms window drift ≤ {DRIFT_THRESHOLD:g}: "
                   f"{_pf(drift is not None and drift <= DRIFT_THRESHOLD)}")
    return out


def ensemble_report(spec: RunSpec, stats: EnsembleStats) -> str:
    lines = ensemble_verdicts(spec, stats)
    lines.append("")
    tv = None
    if 0 not in stats.window_samples:
        tv = stationary_distance(stats)
    rec = [("n_paths", stats.n_paths), ("completed_paths", stats.completed),
           ("aborted_paths", len(stats.aborted_paths)),
           ("nonpositive_paths", stats.nonpositive_paths),
           ("dfe_ms_average", stats.dfe_ms_average), ("ee_ms_average", stats.ee_ms_average),
           ("ee_ms_window1", stats.ee_ms_windows[0] if stats.ee_ms_windows else None),
           ("ee_ms_window2", stats.ee_ms_windows[1] if stats.ee_ms_windows else None),
           ("ee_window_drift", stats.ee_window_drift),
           ("lyapunov_mean", stats.lyapunov_mean),
           ("lyapunov_half_width", stats.lyapunov_half_width),
           ("lyapunov_count", stats.lyapunov_count),
           ("extinction_fraction", stats.extinction_fraction),
           ("tv_distance", tv),
           ("window_samples", f"{stats.window_samples[0]}, {stats.window_samples[1]}"),
           ("histogram_box", ", ".join(_r(b) for b in stats.box)),
           ("n_min", stats.n_min), ("n_max", stats.n_max)]
    lines += [f"{k} = {v if isinstance(v, str) else _r(v)}" for k, v in rec]
    return "\n".join(lines) + "\n"


# output plumbing ------------------------------------------------------------------

def _out_dir(args, spec: Optional[RunSpec]) -> str:
    if args.out:
        return args.out
    if os.environ.get(OUT_ENV):
        return os.environ[OUT_ENV]
    if spec is not None and spec.out_dir:
        return spec.out_dir
    return "out"


def manifest(spec: RunSpec, command: str, files: Sequence[str], extra=()) -> str:
    rec = [("tool", "stochsirs"), ("version", __version__), ("command", command),
           ("preset", spec.preset or "none"), ("config_hash", spec.config_hash),
           ("seed", str(spec.sim.seed)), ("scheme", spec.sim.scheme.value),
           ("dt", repr(spec.sim.dt)), *extra, ("files", ", ".join(files))]
    body = "".join(f"{k} = {v}\n" for k, v in rec)
    return body + "\n# resolved configuration\n" + spec.canonical()


def _write_all(out_dir: str, files: dict[str, str]) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for name, text in files.items():
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _overrides(args) -> dict[str, str]:
    o = {}
    if getattr(args, "seed", None) is not None:
        o["sim.seed"] = str(args.seed)
    if getattr(args, "paths", None) is not None:
        o["ensemble.n_paths"] = str(args.paths)
    return o


def _load(args, need_ensemble=False, scheme: Optional[str] = None) -> RunSpec:
    o = _overrides(args)
    if scheme is not None:
        o["sim.scheme"] = scheme
    return load_runspec(args.config, args.preset, o, need_ensemble=need_ensemble)


# commands -------------------------------------------------------------------------

def cmd_check(args) -> int:
    spec = _load(args)
    text = check_report(spec)
    sys.stdout.write(text)
    if args.out:
        _write_all(args.out, {"check.txt": text,
                              "manifest.txt": manifest(spec, "check", ["check.txt"])})
    return EXIT_OK


def _schemes(arg: Optional[str]) -> Optional[list[str]]:
    if arg is None:
        return None
    names = [s for s in (x.strip() for x in arg.split(",")) if s]
    if not names:
        raise ConfigError(["--scheme: empty scheme list"])
    try:
        return [Scheme.parse(s).value for s in names]
    except ValueError as exc:
        raise ConfigError([f"--scheme: {exc}"]) from None


def cmd_simulate(args) -> int:
    schemes = _schemes(args.scheme) or [None]
    specs = [_load(args, scheme=s) for s in schemes]
    files = {}
    for spec in specs:
        try:
            traj = simulate(spec.sim, spec.params, spec.noise)
        except TrajectoryAborted as exc:
            print(f"runtime abort ({spec.sim.scheme.value}): {exc}", file=sys.stderr)
            return EXIT_ABORT
        buf = io.StringIO()
        write_trajectory_csv(traj, buf)
        name = f"trajectory_{spec.sim.scheme.value}.csv"
        files[name] = buf.getvalue()
        f = traj.final
        note = ""
        if traj.first_nonpositive is not None:
            k, c = traj.first_nonpositive
            note = f"; first non-positive {'xyz'[c]} at t={traj.times[k]:g}"
        print(f"{spec.sim.scheme.value}: final state ({_g(f.x)}, {_g(f.y)}, {_g(f.z)}) "
              f"at t={_g(traj.times[-1])}{note}")
    extra = [("schemes", ", ".join(s.sim.scheme.value for s in specs))]
    files["manifest.txt"] = manifest(specs[0], "simulate", list(files), extra)
    out = _out_dir(args, specs[0])
    _write_all(out, files)
    print(f"wrote {len(files)} files to {out}")
    return EXIT_OK


def cmd_ensemble(args) -> int:
    scheme = _schemes(args.scheme)
    if scheme is not None and len(scheme) > 1:
        raise ConfigError(["--scheme: ensemble takes a single scheme"])
    spec = _load(args, need_ensemble=True, scheme=scheme[0] if scheme else None)
    try:
        stats = run_ensemble(spec.ensemble, spec.params, spec.noise, workers=args.workers)
    except RuntimeError as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    report = check_report(spec) + "\n" + ensemble_report(spec, stats)
    sys.stdout.write(report)
    paths, hist = io.StringIO(), io.StringIO()
    write_paths_csv(stats, paths)
    write_histograms(stats, hist)
    files = {"report.txt": report, "paths.csv": paths.getvalue(),
             "histogram.csv": hist.getvalue()}
    files["manifest.txt"] = manifest(spec, "ensemble", list(files),
                                     [("n_paths", str(spec.ensemble.n_paths))])
    _write_all(_out_dir(args, spec), files)
    if len(stats.aborted_paths) > ABORT_FRACTION * stats.n_paths:
        print(f"runtime abort: {len(stats.aborted_paths)} of {stats.n_paths} paths became "
              "non-finite", file=sys.stderr)
        return EXIT_ABORT
    return EXIT_OK


SWEEP_COLUMNS = ["axis", "value", "status", "error", "r0", "ee_present", "stationary_holds",
                 "stationary_c", "stationary_bound", "dfe_hypotheses_hold", "dfe_bound",
                 "predicts_extinction", "exponent_bound", "extinction_fraction",
                 "lyapunov_mean", "dfe_ms_average", "n_max", "aborted_paths"]
CROSSING_COLUMNS = ["ee_present", "stationary_holds", "dfe_hypotheses_hold",
                    "predicts_extinction"]


def _parse_values(text: str) -> list[str]:
    vals = [v.strip() for v in text.split(",") if v.strip()]
    if not vals:
        raise ConfigError(["--sweep-values: at least one value is required"])
    bad = []
    for v in vals:
        try:
            if not math.isfinite(float(v)):
                bad.append(v)
        except ValueError:
            bad.append(v)
    if bad:
        raise ConfigError([f"--sweep-values: not a finite number: {', '.join(bad)}"])
    return vals


def _sweep_point(args, key: str, value: str, run_paths: bool) -> dict:
    row = {c: "" for c in SWEEP_COLUMNS}
    row.update(axis=key, value=repr(float(value)))
    o = _overrides(args)
    o[key] = value
    scheme = _schemes(args.scheme)
    if scheme:
        o["sim.scheme"] = scheme[0]
    try:
        spec = load_runspec(args.config, args.preset, o, need_ensemble=run_paths)
    except ConfigError as exc:
        row.update(status="error", error="; ".join(exc.problems))
        return row
    p, n = spec.params, spec.noise
    eq = equilibria(p)
    st, dfe, ext = check_stationary(p, n), check_dfe_bound(p, n), check_extinction(p, n)
    row.update(status="ok", r0=_r(eq.r0), ee_present=_yn(eq.ee is not None),
               stationary_holds=_yn(st.holds),
               stationary_c=_r(st.c_const) if st.c_const is not None else "",
               stationary_bound=_r(st.bound) if st.bound is not None else "",
               dfe_hypotheses_hold=_yn(dfe.hypotheses_hold),
               dfe_bound=_r(dfe.bound_value) if dfe.bound_value is not None else "",
               predicts_extinction=_yn(ext.predicts_extinction),
               exponent_bound=_r(ext.exponent_bound))
    if run_paths:
        try:
            stats = run_ensemble(spec.ensemble, p, n, workers=args.workers)
        except RuntimeError as exc:
            row.update(status="error", error=str(exc))
            return row
        row.update(extinction_fraction=_r(stats.extinction_fraction),
                   lyapunov_mean=_r(stats.lyapunov_mean),
                   dfe_ms_average=_r(stats.dfe_ms_average), n_max=_r(stats.n_max),
                   aborted_paths=str(len(stats.aborted_paths)))
    row["_spec"] = spec
    return row


def closed_form_threshold(key: str, rows: list[dict]) -> Optional[tuple[str, float]]:
    """Closed-form location of the verdict change along ``key``, if one exists.

    Other parameters are taken from the first successful point.
    """
    ok = [r for r in rows if r["status"] == "ok"]
    if not ok:
        return None
    spec = ok[0]["_spec"]
    p = spec.params
    if key == "noise.sigma4":
        return "predicts_extinction", extinction_sigma4_threshold(p, spec.noise.sigma2)
    # R0 = 1 boundaries
    if key == "model.beta":
        return "ee_present", p.mu * (p.alpha + p.mu + p.gamma) / p.lam
    if key == "model.lambda":
        return "ee_present", p.mu * (p.alpha + p.mu + p.gamma) / p.beta
    if key == "model.mu":
        a = p.alpha + p.gamma
        return "ee_present", (-a + math.sqrt(a * a + 4 * p.beta * p.lam)) / 2
    return None


def sweep_summary(key: str, rows: list[dict]) -> list[str]:
    ok = [r for r in rows if r["status"] == "ok"]
    lines = [f"sweep over {key}: {len(ok)} of {len(rows)} points succeeded"]
    for col in CROSSING_COLUMNS:
        for a, b in zip(ok, ok[1:]):
            if a[col] != b[col]:
                lines.append(f"{col} flips {a[col]}→{b[col]} between {key}="
                             f"{_g(float(a['value']))} and {_g(float(b['value']))}")
    cf = closed_form_threshold(key, rows)
    if cf is not None:
        lines.append(f"closed-form {cf[0]} threshold: {key.split('.')[1]}* = {_g(cf[1])}")
    return lines


def cmd_sweep(args) -> int:
    key = resolve_axis(args.sweep_axis)
    values = _parse_values(args.sweep_values)
    run_paths = args.paths is not None
    rows = [_sweep_point(args, key, v, run_paths) for v in values]
    if not any(r["status"] == "ok" for r in rows):
        for r in rows:
            print(f"{key}={r['value']}: {r['error']}", file=sys.stderr)
        return EXIT_CONFIG
    buf = io.StringIO()
    buf.write(",".join(SWEEP_COLUMNS) + "\n")
    for r in rows:
        cells = [r[c].replace('"', '""') for c in SWEEP_COLUMNS]
        buf.write(",".join(f'"{c}"' if ("," in c or '"' in c) else c for c in cells) + "\n")
    summary = "\n".join(sweep_summary(key, rows)) + "\n"
    sys.stdout.write(summary)
    spec = next(r["_spec"] for r in rows if r["status"] == "ok")
    files = {"sweep.csv": buf.getvalue(), "sweep_summary.txt": summary}
    files["manifest.txt"] = manifest(spec, "sweep", list(files),
                                     [("sweep_axis", key),
                                      ("sweep_values", ", ".join(values))])
    _write_all(_out_dir(args, spec), files)
    return EXIT_OK


# argument parsing -------------------------------------------------------------------

def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in an unsigned 64-bit integer: {text}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value configuration file")
    common.add_argument("--preset", metavar="NAME",
                        help=f"named parameter set ({', '.join(sorted(PRESETS))})")
    common.add_argument("--out", metavar="DIR",
                        help=f"output directory (default: ${OUT_ENV}, output.dir, or ./out)")
    common.add_argument("--seed", type=_u64, metavar="U64")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--scheme", metavar="NAME",
                     help="rk4, euler-maruyama, milstein-literal or milstein-corrected")
    run.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1,
                     help="threads for ensemble paths (results do not depend on this)")

    parser = argparse.ArgumentParser(prog="stochsirs",
                                     description="Stochastic SIRS model: checks and simulations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="R0, equilibria and analytic conditions")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", parents=[common, run],
                       help="one trajectory per scheme (comma-separated --scheme)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ensemble", parents=[common, run], help="Monte Carlo statistics")
    p.add_argument("--paths", type=_positive_int, metavar="N")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("sweep", parents=[common, run],
                       help="hypothesis checks (and optional ensembles) along one parameter")
    p.add_argument("--sweep-axis", required=True, metavar="KEY", help="e.g. sigma4 or model.mu")
    p.add_argument("--sweep-values", required=True, metavar="CSV", help="e.g. 0.01,0.03,0.1")
    p.add_argument("--paths", type=_positive_int, metavar="N",
                   help="also run an ensemble of N paths at each point")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for msg in exc.problems:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
