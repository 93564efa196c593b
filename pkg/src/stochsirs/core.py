"""Model parameters, state, vector fields and equilibria of the stochastic SIRS model.

The model is

    dX = (Λ + ηZ − βXY − μX) dt − σ4 XY dB4 + σ1 X dB1
    dY = (βXY − (α+μ+γ)Y) dt    + σ4 XY dB4 + σ2 Y dB2
    dZ = (γY − (η+μ)Z) dt                   + σ3 Z dB3

with four independent Brownian motions. Setting every σ to zero recovers the
deterministic SIRS ODE.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from ._pykernels import drift3

__all__ = [
    "ModelParams",
    "NoiseIntensities",
    "State",
    "Equilibria",
    "BASELINE_INITIAL",
    "baseline_params",
    "basic_reproduction_number",
    "equilibria",
    "drift",
    "diffusion",
]


@dataclass(frozen=True)
class ModelParams:
    """Deterministic rates. ``lam`` is the recruitment rate Λ.

    Rates are per unit time; ``beta`` is per individual per unit time.
    All must be strictly positive.
    """

    lam: float
    beta: float
    eta: float
    mu: float
    gamma: float
    alpha: float

    def __post_init__(self):
        bad = [f.name for f in fields(self)
               if not (math.isfinite(getattr(self, f.name)) and getattr(self, f.name) > 0)]
        if bad:
            raise ValueError(f"parameters must be finite and > 0: {', '.join(bad)}")

    @property
    def r0(self) -> float:
        return basic_reproduction_number(self)

    def replace(self, **changes) -> "ModelParams":
        kw = {f.name: getattr(self, f.name) for f in fields(self)}
        kw.update(changes)
        return ModelParams(**kw)

    def as_tuple(self) -> tuple[float, ...]:
        return (self.lam, self.beta, self.eta, self.mu, self.gamma, self.alpha)


@dataclass(frozen=True)
class NoiseIntensities:
    """White-noise strengths σ1..σ4 (non-negative)."""

    sigma1: float = 0.0
    sigma2: float = 0.0
    sigma3: float = 0.0
    sigma4: float = 0.0

    def __post_init__(self):
        bad = [f.name for f in fields(self)
               if not (math.isfinite(getattr(self, f.name)) and getattr(self, f.name) >= 0)]
        if bad:
            raise ValueError(f"noise intensities must be finite and >= 0: {', '.join(bad)}")

    def scaled(self, factor: float) -> "NoiseIntensities":
        return NoiseIntensities(*(factor * s for s in self.as_tuple()))

    def replace(self, **changes) -> "NoiseIntensities":
        kw = {f.name: getattr(self, f.name) for f in fields(self)}
        kw.update(changes)
        return NoiseIntensities(**kw)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.sigma1, self.sigma2, self.sigma3, self.sigma4)

    @property
    def is_zero(self) -> bool:
        return not any(self.as_tuple())


@dataclass(frozen=True)
class State:
    """Susceptible, infected and recovered counts."""

    x: float
    y: float
    z: float

    @property
    def admissible(self) -> bool:
        return self.x > 0 and self.y > 0 and self.z > 0

    @property
    def total(self) -> float:
        return self.x + self.y + self.z

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, a) -> "State":
        return cls(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class Equilibria:
    dfe: State
    ee: Optional[State]
    r0: float


# Baseline rates and initial state; mu switches between the two regimes.
BASELINE_INITIAL = State(10.0, 5.0, 2.0)


def baseline_params(mu: float = 0.006, **overrides) -> ModelParams:
    """Baseline rates. ``mu=0.05`` gives R0 < 1, ``mu=0.006`` gives R0 > 1."""
    base = dict(lam=0.33, beta=0.013, eta=0.023, mu=mu, gamma=0.04, alpha=0.006)
    base.update(overrides)
    return ModelParams(**base)


def basic_reproduction_number(p: ModelParams) -> float:
    return p.beta * p.lam / (p.mu * (p.alpha + p.mu + p.gamma))


def equilibria(p: ModelParams) -> Equilibria:
    """Disease-free equilibrium and, when R0 > 1, the endemic one.

    At R0 == 1 the endemic point coincides with the DFE and is reported
    absent, as is everything below that.

    The endemic point solves drift = 0:

        X* = Λ/(μR0),  Z* = γΛ(R0 − 1) / (R0(μγ + (μ+η)(μ+α))),  Y* = (μ+η)Z*/γ

    Note: the commonly printed closed form for Z* lacks the factor Λ and is
    not a zero of the vector field unless Λ = 1.
    """
    r0 = basic_reproduction_number(p)
    dfe = State(p.lam / p.mu, 0.0, 0.0)
    if r0 <= 1.0:
        return Equilibria(dfe=dfe, ee=None, r0=r0)
    x = p.lam / (p.mu * r0)
    z = (p.gamma * p.lam * (r0 - 1.0)
         / (r0 * (p.mu * p.gamma + (p.mu + p.eta) * (p.mu + p.alpha))))
    y = (p.mu + p.eta) / p.gamma * z
    return Equilibria(dfe=dfe, ee=State(x, y, z), r0=r0)


def drift_xyz(x: float, y: float, z: float, p: ModelParams) -> tuple[float, float, float]:
    return drift3(x, y, z, *p.as_tuple())


def drift(s: State, p: ModelParams) -> np.ndarray:
    """Deterministic vector field at ``s``."""
    return np.array(drift_xyz(s.x, s.y, s.z, p))


def diffusion(s: State, n: NoiseIntensities) -> np.ndarray:
    """3x4 diffusion matrix; column j multiplies dB_{j+1}."""
    g = np.zeros((3, 4))
    g[0, 0] = n.sigma1 * s.x
    g[1, 1] = n.sigma2 * s.y
    g[2, 2] = n.sigma3 * s.z
    c = n.sigma4 * s.x * s.y
    g[0, 3] = -c
    g[1, 3] = c
    return g
