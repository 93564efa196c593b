"""Monte Carlo ensembles and the statistics used to check the long-run claims.

Each path is integrated from its own noise substream, reduced to a small
``PathSummary`` plus two histogram count arrays, and then discarded. The
per-path results are merged in path-index order, so the outcome does not
depend on how paths were scheduled across worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, TextIO

import numpy as np

from .conditions import DfeBoundReport
from .core import ModelParams, NoiseIntensities, equilibria
from .integrate import SimConfig, Trajectory, TrajectoryAborted, simulate

__all__ = [
    "EnsembleConfig",
    "PathSummary",
    "EnsembleStats",
    "Verdict",
    "EmptyWindowError",
    "path_summary",
    "run_ensemble",
    "stationary_distance",
    "dfe_bound_check",
    "boundedness_check",
    "lyapunov_slope",
    "write_paths_csv",
    "write_histograms",
]

Z95 = 1.959963984540054


class EmptyWindowError(ValueError):
    """A comparison window received no samples."""


@dataclass(frozen=True)
class EnsembleConfig:
    n_paths: int = 100
    sim: SimConfig = field(default_factory=SimConfig)
    burn_in: float = 0.0
    histogram_bins: int = 20
    window_split: float = 0.5

    def __post_init__(self):
        errors = self.validation_errors()
        if errors:
            raise ValueError("invalid EnsembleConfig: " + "; ".join(errors))

    def validation_errors(self) -> list[str]:
        errs = []
        if not (isinstance(self.n_paths, int) and self.n_paths >= 1):
            errs.append(f"n_paths must be an integer >= 1 (got {self.n_paths!r})")
        if not (0 <= self.burn_in < self.sim.t_final):
            errs.append(f"burn_in must be in [0, t_final) (got {self.burn_in})")
        if not (isinstance(self.histogram_bins, int) and self.histogram_bins >= 2):
            errs.append(f"histogram_bins must be an integer >= 2 (got {self.histogram_bins!r})")
        if not (0 < self.window_split < 1):
            errs.append(f"window_split must be in (0, 1) (got {self.window_split})")
        return errs

    def replace(self, **changes) -> "EnsembleConfig":
        kw = {k: getattr(self, k) for k in self.__dataclass_fields__}
        kw.update(changes)
        return EnsembleConfig(**kw)


@dataclass(frozen=True)
class PathSummary:
    index: int
    lyapunov_slope: float  # NaN when fewer than two usable samples
    extinct_at: Optional[float]
    dfe_ms: float
    ee_ms: Optional[float]
    ee_ms_windows: Optional[tuple[float, float]]
    n_min: float
    n_max: float
    first_nonpositive: Optional[tuple[int, int]]


@dataclass
class EnsembleStats:
    n_paths: int
    aborted_paths: tuple[int, ...]
    paths: tuple[PathSummary, ...]
    dfe_ms_average: float
    ee_ms_average: Optional[float]
    ee_ms_windows: Optional[tuple[float, float]]
    lyapunov_slopes: np.ndarray
    lyapunov_mean: float
    lyapunov_half_width: float
    extinction_fraction: float
    hist_w1: np.ndarray
    hist_w2: np.ndarray
    window_samples: tuple[int, int]
    box: tuple[float, float, float]
    n_min: float
    n_max: float
    n0: float
    lam_over_mu: float
    nonpositive_paths: int

    @property
    def completed(self) -> int:
        return len(self.paths)

    @property
    def lyapunov_count(self) -> int:
        return int(np.isfinite(self.lyapunov_slopes).sum())

    @property
    def ee_window_drift(self) -> Optional[float]:
        """Relative change of the EE mean-square deviation between the two windows."""
        if self.ee_ms_windows is None:
            return None
        a, b = self.ee_ms_windows
        top = max(abs(a), abs(b))
        return 0.0 if top == 0 else abs(b - a) / top


@dataclass(frozen=True)
class Verdict:
    status: str  # "pass", "fail" or "inapplicable"
    observed: Optional[float] = None
    threshold: Optional[float] = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


# ---------------------------------------------------------------------------

def _time_average(f: np.ndarray, t: np.ndarray) -> float:
    if len(t) < 2:
        return float(f[0]) if len(f) else math.nan
    return float(np.trapezoid(f, t) / (t[-1] - t[0]))


def lyapunov_slope(traj: Trajectory, burn_in: float = 0.0, floor: float = 1e-6) -> float:
    """Least-squares slope of ln Y(t) on [burn_in, extinction].

    The sample at which Y first falls below ``floor`` is kept, with Y raised
    to ``floor``; later samples are ignored.
    """
    t = traj.times
    y = traj.y
    i0 = int(np.searchsorted(t, burn_in, side="left"))
    end = len(t)
    if traj.extinct_at is not None:
        end = int(np.searchsorted(t, traj.extinct_at, side="left")) + 1
    if end - i0 < 2:
        return math.nan
    ts = t[i0:end]
    ly = np.log(np.maximum(y[i0:end], floor))
    tc = ts - ts.mean()
    return float(np.dot(tc, ly - ly.mean()) / np.dot(tc, tc))


def _bin_index(states: np.ndarray, box: np.ndarray, bins: int) -> np.ndarray:
    idx = np.floor(states / box * bins).astype(np.int64)
    np.clip(idx, 0, bins - 1, out=idx)
    return (idx[:, 0] * bins + idx[:, 1]) * bins + idx[:, 2]


def path_summary(traj: Trajectory, cfg: EnsembleConfig, p: ModelParams,
                 box: Optional[np.ndarray] = None):
    """Reduce one trajectory to its statistics and window histogram counts."""
    eq = equilibria(p)
    t = traj.times
    s = traj.states
    i0 = int(np.searchsorted(t, cfg.burn_in, side="left"))
    t_split = cfg.burn_in + cfg.window_split * (cfg.sim.t_final - cfg.burn_in)
    isplit = int(np.searchsorted(t, t_split, side="left"))
    tw, sw = t[i0:], s[i0:]

    dx = sw[:, 0] - eq.dfe.x
    dfe_f = dx * dx + sw[:, 1] ** 2 + sw[:, 2] ** 2
    dfe_ms = _time_average(dfe_f, tw)
    ee_ms = ee_windows = None
    if eq.ee is not None:
        d = sw - eq.ee.as_array()
        ee_f = (d * d).sum(axis=1)
        ee_ms = _time_average(ee_f, tw)
        k = isplit - i0
        ee_windows = (_time_average(ee_f[:k + 1], tw[:k + 1]), _time_average(ee_f[k:], tw[k:]))
    total = sw.sum(axis=1)

    counts = None
    if box is not None:
        nb = cfg.histogram_bins ** 3
        counts = (np.bincount(_bin_index(s[i0:isplit], box, cfg.histogram_bins), minlength=nb),
                  np.bincount(_bin_index(s[isplit:], box, cfg.histogram_bins), minlength=nb))
    summary = PathSummary(
        index=traj.path_index,
        lyapunov_slope=lyapunov_slope(traj, cfg.burn_in, cfg.sim.extinction_floor),
        extinct_at=traj.extinct_at,
        dfe_ms=dfe_ms,
        ee_ms=ee_ms,
        ee_ms_windows=ee_windows,
        n_min=float(total.min()),
        n_max=float(total.max()),
        first_nonpositive=traj.first_nonpositive,
    )
    return summary, counts


def histogram_box(p: ModelParams, cfg: EnsembleConfig) -> np.ndarray:
    """Per-axis upper edge of the histogram support.

    Three times the endemic equilibrium when it exists, else three times the
    DFE; the DFE's zero Y and Z axes fall back to the initial state.
    """
    eq = equilibria(p)
    if eq.ee is not None:
        return 3.0 * eq.ee.as_array()
    dfe = eq.dfe.as_array()
    return 3.0 * np.where(dfe > 0, dfe, cfg.sim.initial.as_array())


def run_ensemble(cfg: EnsembleConfig, p: ModelParams, n: NoiseIntensities,
                 workers: int = 1) -> EnsembleStats:
    """Run ``cfg.n_paths`` independent paths and merge their statistics.

    Paths whose state becomes non-finite are excluded and listed in
    ``aborted_paths``. Raises RuntimeError if every path aborts.
    """
    box = histogram_box(p, cfg)

    def one(i):
        try:
            traj = simulate(cfg.sim, p, n, path_index=i)
        except TrajectoryAborted:
            return None
        return path_summary(traj, cfg, p, box)

    if workers > 1 and cfg.n_paths > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(cfg.n_paths)))
    else:
        results = [one(i) for i in range(cfg.n_paths)]

    aborted = tuple(i for i, r in enumerate(results) if r is None)
    done = [r for r in results if r is not None]
    if not done:
        raise RuntimeError(f"all {cfg.n_paths} paths aborted")
    paths = tuple(r[0] for r in done)
    c1 = np.zeros(cfg.histogram_bins ** 3, dtype=np.int64)
    c2 = np.zeros_like(c1)
    for _, (a, b) in done:
        c1 += a
        c2 += b
    shape = (cfg.histogram_bins,) * 3
    h1 = (c1 / c1.sum() if c1.sum() else c1.astype(float)).reshape(shape)
    h2 = (c2 / c2.sum() if c2.sum() else c2.astype(float)).reshape(shape)

    slopes = np.array([ps.lyapunov_slope for ps in paths])
    finite = slopes[np.isfinite(slopes)]
    lmean = float(finite.mean()) if finite.size else math.nan
    half = float(Z95 * finite.std(ddof=1) / math.sqrt(finite.size)) if finite.size > 1 else math.nan

    eq = equilibria(p)
    ee_avg = ee_win = None
    if eq.ee is not None:
        ee_avg = float(np.mean([ps.ee_ms for ps in paths]))
        w = np.array([ps.ee_ms_windows for ps in paths])
        ee_win = (float(w[:, 0].mean()), float(w[:, 1].mean()))

    return EnsembleStats(
        n_paths=cfg.n_paths,
        aborted_paths=aborted,
        paths=paths,
        dfe_ms_average=float(np.mean([ps.dfe_ms for ps in paths])),
        ee_ms_average=ee_avg,
        ee_ms_windows=ee_win,
        lyapunov_slopes=slopes,
        lyapunov_mean=lmean,
        lyapunov_half_width=half,
        extinction_fraction=sum(ps.extinct_at is not None for ps in paths) / len(paths),
        hist_w1=h1,
        hist_w2=h2,
        window_samples=(int(c1.sum()), int(c2.sum())),
        box=tuple(float(b) for b in box),
        n_min=min(ps.n_min for ps in paths),
        n_max=max(ps.n_max for ps in paths),
        n0=cfg.sim.initial.total,
        lam_over_mu=p.lam / p.mu,
        nonpositive_paths=sum(ps.first_nonpositive is not None for ps in paths),
    )


def stationary_distance(stats: EnsembleStats) -> float:
    """Total-variation distance between the two window histograms."""
    if 0 in stats.window_samples:
        raise EmptyWindowError(f"window sample counts {stats.window_samples}")
    return float(0.5 * np.abs(stats.hist_w1 - stats.hist_w2).sum())


def dfe_bound_check(stats: EnsembleStats, report: DfeBoundReport,
                    tolerance: float = 0.1, zero_floor: float = 1e-3) -> Verdict:
    """Compare the observed DFE mean-square deviation with the theoretical bound.

    With a zero bound (σ1 = 0) the threshold is ``zero_floor`` instead.
    """
    if not report.hypotheses_hold or report.bound_value is None:
        return Verdict("inapplicable", stats.dfe_ms_average, None, "hypotheses do not hold")
    bound = report.bound_value
    thr = bound * (1 + tolerance) if bound > 0 else zero_floor
    ok = stats.dfe_ms_average <= thr
    return Verdict("pass" if ok else "fail", stats.dfe_ms_average, thr,
                   f"bound {bound:.5g} x {1 + tolerance:g}" if bound > 0
                   else f"bound 0, floor {zero_floor:g}")


def boundedness_check(stats: EnsembleStats, slack: float = 0.0) -> Verdict:
    """Total population stays in (0, N_cap) after burn-in across all paths."""
    cap = 10.0 * max(stats.n0, stats.lam_over_mu + slack)
    ok = stats.n_min > 0 and stats.n_max < cap
    return Verdict("pass" if ok else "fail", stats.n_max, cap,
                   f"n_min={stats.n_min!r} n_max={stats.n_max!r}")


def write_paths_csv(stats: EnsembleStats, fh: TextIO) -> None:
    fh.write("path,lyapunov_slope,extinct_at\n")
    for ps in stats.paths:
        ext = "" if ps.extinct_at is None else repr(ps.extinct_at)
        fh.write(f"{ps.index},{ps.lyapunov_slope!r},{ext}\n")


def write_histograms(stats: EnsembleStats, fh: TextIO) -> None:
    """Sparse dump of both window histograms: bin index triple and mass."""
    fh.write("window,i,j,k,mass\n")
    for name, h in (("w1", stats.hist_w1), ("w2", stats.hist_w2)):
        for i, j, k in zip(*np.nonzero(h)):
            fh.write(f"{name},{i},{j},{k},{float(h[i, j, k])!r}\n")
