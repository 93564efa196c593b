"""Fixed-step integrators for the deterministic and stochastic SIRS systems.

Four schemes are available:

* ``RK4`` - classical Runge-Kutta on the noise-free vector field.
* ``EULER_MARUYAMA`` - strong order 1/2, used as a cross-check.
* ``MILSTEIN_LITERAL`` - a Milstein variant that adds the σ4 bracket
  ``XY[σ4ξ4√dt + ½σ4²(ξ4² − 1)dt]`` to both X and Y. It is kept for
  reproducing reference runs; it is not consistent with the SDE when σ4 > 0.
* ``MILSTEIN_CORRECTED`` - Milstein with the sign of the SDE, the exact
  ``(g·∇)g`` correction for the σ4 column and the symmetric mixed terms
  ``½ΔW_jΔW_k``. Lévy areas are omitted in both Milstein variants.

Per-step noise comes from one independent generator per path, derived from
``(seed, path_index)``; draws are consumed in the order ξ1, ξ2, ξ3, ξ4.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

import numpy as np

from . import _pykernels as _pk
from ._kernels import integrate_path
from .core import ModelParams, NoiseIntensities, State, BASELINE_INITIAL

__all__ = [
    "Scheme",
    "PositivityPolicy",
    "SimConfig",
    "Trajectory",
    "TrajectoryAborted",
    "EXTINCTION_FLOOR",
    "step_rk4",
    "step_euler_maruyama",
    "step_milstein_literal",
    "step_milstein_corrected",
    "path_rng",
    "draw_noise",
    "simulate",
    "write_trajectory_csv",
    "fmt_float",
    "ConvergenceResult",
    "strong_convergence",
]

EXTINCTION_FLOOR = 1e-6


class Scheme(enum.Enum):
    RK4 = "rk4"
    EULER_MARUYAMA = "euler-maruyama"
    MILSTEIN_LITERAL = "milstein-literal"
    MILSTEIN_CORRECTED = "milstein-corrected"

    @property
    def code(self) -> int:
        return _SCHEME_CODES[self]

    @property
    def stochastic(self) -> bool:
        return self is not Scheme.RK4

    @classmethod
    def parse(cls, name: str) -> "Scheme":
        key = name.strip().lower().replace("_", "-")
        aliases = {"rk4-deterministic": "rk4", "em": "euler-maruyama",
                   "eulermaruyama": "euler-maruyama", "milsteinliteral": "milstein-literal",
                   "milsteincorrected": "milstein-corrected", "milstein": "milstein-corrected"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown scheme {name!r}; expected one of {names}") from None


_SCHEME_CODES = {
    Scheme.RK4: _pk.RK4,
    Scheme.EULER_MARUYAMA: _pk.EULER_MARUYAMA,
    Scheme.MILSTEIN_LITERAL: _pk.MILSTEIN_LITERAL,
    Scheme.MILSTEIN_CORRECTED: _pk.MILSTEIN_CORRECTED,
}


class PositivityPolicy(enum.Enum):
    NONE = "none"
    CLAMP = "clamp-at-zero"

    @classmethod
    def parse(cls, name: str) -> "PositivityPolicy":
        key = name.strip().lower().replace("_", "-")
        if key in ("clamp", "clamp-at-zero"):
            return cls.CLAMP
        if key == "none":
            return cls.NONE
        raise ValueError(f"unknown positivity policy {name!r}; expected 'none' or 'clamp-at-zero'")


def n_steps_for(t_final: float, dt: float) -> tuple[int, float]:
    """Number of steps and the length of the last one (may be shorter than dt)."""
    q = t_final / dt
    r = round(q)
    if abs(q - r) <= 1e-9 * max(1.0, q):
        return int(r), dt
    n = math.ceil(q)
    return n, t_final - (n - 1) * dt


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.1
    t_final: float = 400.0
    initial: State = BASELINE_INITIAL
    seed: int = 0
    scheme: Scheme = Scheme.MILSTEIN_CORRECTED
    positivity: PositivityPolicy = PositivityPolicy.CLAMP
    extinction_floor: float = EXTINCTION_FLOOR

    def __post_init__(self):
        errors = self.validation_errors()
        if errors:
            raise ValueError("invalid SimConfig: " + "; ".join(errors))

    def validation_errors(self) -> list[str]:
        errs = []
        if not (math.isfinite(self.dt) and self.dt > 0):
            errs.append(f"dt must be > 0 (got {self.dt})")
        if not (math.isfinite(self.t_final) and self.t_final >= self.dt):
            errs.append(f"t_final must be >= dt (got {self.t_final})")
        if not self.initial.admissible:
            errs.append(f"initial state must be strictly positive (got {self.initial})")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            errs.append(f"seed must be an unsigned 64-bit integer (got {self.seed!r})")
        if not (self.extinction_floor >= 0):
            errs.append(f"extinction_floor must be >= 0 (got {self.extinction_floor})")
        if not errs and self.t_final / self.dt > 2**40:
            errs.append("too many steps")
        return errs

    @property
    def n_steps(self) -> int:
        return n_steps_for(self.t_final, self.dt)[0]

    def replace(self, **changes) -> "SimConfig":
        kw = {k: getattr(self, k) for k in self.__dataclass_fields__}
        kw.update(changes)
        return SimConfig(**kw)


@dataclass
class Trajectory:
    """Time grid, states (shape ``(n + 1, 3)``) and event flags of one path."""

    times: np.ndarray
    states: np.ndarray
    first_nonpositive: Optional[tuple[int, int]] = None
    extinct_at: Optional[float] = None
    path_index: int = 0

    @property
    def x(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def z(self) -> np.ndarray:
        return self.states[:, 2]

    @property
    def total(self) -> np.ndarray:
        return self.states.sum(axis=1)

    def state(self, k: int) -> State:
        return State.from_array(self.states[k])

    @property
    def final(self) -> State:
        return self.state(-1)


class TrajectoryAborted(RuntimeError):
    """The state became non-finite (overflow or NaN)."""

    def __init__(self, step: int, time: float, path_index: int = 0, state=None):
        self.step = step
        self.time = time
        self.path_index = path_index
        self.state = state
        super().__init__(f"non-finite state at step {step} (t={time:g}) on path {path_index}")


# single-step API -----------------------------------------------------------

def step_rk4(s: State, p: ModelParams, dt: float) -> State:
    return State(*_pk.rk4(s.x, s.y, s.z, *p.as_tuple(), dt))


def _stochastic_step(fn, s, p, n, dt, xi):
    xi1, xi2, xi3, xi4 = (float(v) for v in xi)
    return State(*fn(s.x, s.y, s.z, *p.as_tuple(), *n.as_tuple(), dt, math.sqrt(dt),
                     xi1, xi2, xi3, xi4))


def step_euler_maruyama(s: State, p: ModelParams, n: NoiseIntensities, dt: float, xi) -> State:
    return _stochastic_step(_pk.euler_maruyama, s, p, n, dt, xi)


def step_milstein_literal(s: State, p: ModelParams, n: NoiseIntensities, dt: float, xi) -> State:
    """One step of the literal variant.

    Both the X and Y updates gain ``XY[σ4 ξ4 √dt + ½σ4²(ξ4² − 1)dt]``.
    """
    return _stochastic_step(_pk.milstein_literal, s, p, n, dt, xi)


def step_milstein_corrected(s: State, p: ModelParams, n: NoiseIntensities, dt: float, xi) -> State:
    """Milstein step consistent with the SDE: X loses the σ4 increment that Y gains.

    The σ4 correction is ``±½σ4² xy(x − y)(ξ4² − 1)dt``, which is ``(g·∇)g`` for
    the column ``σ4·xy·(−1, 1, 0)``; it cancels in X + Y. The noise is not
    commutative (σ4 couples to σ1 and σ2), so the mixed iterated integrals
    are approximated by ``½ΔW_jΔW_k``. All σ4 terms vanish when σ4 = 0, leaving
    the literal variant unchanged.
    """
    return _stochastic_step(_pk.milstein_corrected, s, p, n, dt, xi)


# noise streams --------------------------------------------------------------

def path_rng(seed: int, path_index: int = 0) -> np.random.Generator:
    """Independent generator for one path, reproducible regardless of scheduling."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(path_index,))))


def draw_noise(seed: int, path_index: int, n_steps: int) -> np.ndarray:
    """Standard normals of shape ``(n_steps, 4)``; row k is (ξ1, ξ2, ξ3, ξ4) of step k."""
    return path_rng(seed, path_index).standard_normal((n_steps, 4))


# driver -----------------------------------------------------------------------

def time_grid(t_final: float, dt: float) -> np.ndarray:
    n, _ = n_steps_for(t_final, dt)
    t = np.arange(n + 1, dtype=float) * dt
    t[-1] = t_final
    return t


def simulate(config: SimConfig, p: ModelParams, n: NoiseIntensities,
             path_index: int = 0, xi: Optional[np.ndarray] = None) -> Trajectory:
    """Integrate one path.

    ``xi`` overrides the generated normals (shape ``(n_steps, 4)``); it is
    used by the convergence harness to share Brownian increments.

    Raises TrajectoryAborted if the state stops being finite.
    """
    n_steps, last_dt = n_steps_for(config.t_final, config.dt)
    times = time_grid(config.t_final, config.dt)
    if config.scheme.stochastic:
        if xi is None:
            xi = draw_noise(config.seed, path_index, n_steps)
        xi = np.ascontiguousarray(xi, dtype=float)
        if xi.shape != (n_steps, 4):
            raise ValueError(f"xi must have shape {(n_steps, 4)}, got {xi.shape}")
    out = np.empty((n_steps + 1, 3))
    s0 = config.initial
    status, bad, nonpos, comp, ext = integrate_path(
        (s0.x, s0.y, s0.z), p.as_tuple(), n.as_tuple(), config.dt, last_dt, n_steps,
        config.scheme.code, config.positivity is PositivityPolicy.CLAMP,
        config.extinction_floor, xi, out)
    if status != _pk.OK:
        raise TrajectoryAborted(bad, float(times[bad]), path_index, out[:bad].copy())
    return Trajectory(
        times=times,
        states=out,
        first_nonpositive=(nonpos, comp) if nonpos >= 0 else None,
        extinct_at=float(times[ext]) if ext >= 0 else None,
        path_index=path_index,
    )


@dataclass(frozen=True)
class ConvergenceResult:
    dts: tuple[float, ...]
    errors: tuple[float, ...]  # RMS over paths of |X_dt(T) - X_ref(T)|
    order: float  # least-squares slope of log error against log dt


def strong_convergence(scheme: Scheme, p: ModelParams, n: NoiseIntensities,
                       initial: State, t_final: float, dts: Sequence[float],
                       dt_ref: float, n_paths: int, seed: int = 0,
                       reference: Scheme = Scheme.MILSTEIN_CORRECTED) -> ConvergenceResult:
    """Empirical strong order of ``scheme`` with shared Brownian increments.

    Each path draws fine normals at ``dt_ref``; a coarse step of m fine steps
    uses ``sum(ξ)/√m``, i.e. the same Brownian path. Every dt must be an
    integer multiple of ``dt_ref`` and divide ``t_final``.
    """
    n_fine, _ = n_steps_for(t_final, dt_ref)
    base = SimConfig(dt=dt_ref, t_final=t_final, initial=initial, seed=seed,
                     scheme=reference, positivity=PositivityPolicy.NONE)
    ms = []
    for dt in dts:
        m = round(dt / dt_ref)
        if abs(m * dt_ref - dt) > 1e-9 * dt or n_fine % m:
            raise ValueError(f"dt={dt} is not a multiple of dt_ref={dt_ref} dividing the horizon")
        ms.append(m)
    sq = np.zeros(len(dts))
    for i in range(n_paths):
        xi = draw_noise(seed, i, n_fine)
        ref = simulate(base, p, n, path_index=i, xi=xi).final.as_array()
        for j, (dt, m) in enumerate(zip(dts, ms)):
            coarse = xi.reshape(-1, m, 4).sum(axis=1) / math.sqrt(m)
            cfg = base.replace(dt=dt, scheme=scheme)
            d = simulate(cfg, p, n, path_index=i, xi=coarse).final.as_array() - ref
            sq[j] += float(d @ d)
    errors = np.sqrt(sq / n_paths)
    order = float(np.polyfit(np.log(dts), np.log(errors), 1)[0])
    return ConvergenceResult(tuple(float(d) for d in dts), tuple(errors.tolist()), order)


def fmt_float(v: float) -> str:
    """Shortest decimal that round-trips to the same double."""
    return repr(float(v))


def write_trajectory_csv(traj: Trajectory, fh: TextIO) -> None:
    fh.write("t,x,y,z\n")
    r = repr
    for t, (x, y, z) in zip(traj.times.tolist(), traj.states.tolist()):
        fh.write(f"{r(t)},{r(x)},{r(y)},{r(z)}\n")
