"""Parametric hypotheses of the stationary-distribution, DFE-fluctuation and
extinction results, evaluated as plain data.

Every report stores the constants it was decided from, so the boolean verdict
can always be re-derived by the caller. All inequalities are strict.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .core import ModelParams, NoiseIntensities, State, equilibria

__all__ = [
    "StationaryConditionReport",
    "DfeBoundReport",
    "ExtinctionReport",
    "check_stationary",
    "ellipticity_kappa",
    "check_dfe_bound",
    "check_extinction",
    "extinction_sigma4_threshold",
]


@dataclass(frozen=True)
class StationaryConditionReport:
    """Existence condition for a stationary distribution around the endemic state.

    When R0 <= 1 there is no endemic equilibrium; ``ee_defined`` is False and
    every EE-dependent constant (``d1``, ``c_const``, ``bound``) is None.
    """

    r0: float
    ee_defined: bool
    d1: Optional[float]
    d2: float
    d3: float
    c_const: Optional[float]
    bound: Optional[float]
    holds: bool
    ee: Optional[State] = None

    def rederive(self) -> bool:
        if not self.ee_defined:
            return False
        return self.r0 > 1.0 and 0.0 < self.c_const < self.bound


@dataclass(frozen=True)
class DfeBoundReport:
    """Mean-square fluctuation bound around the disease-free equilibrium.

    ``c_min`` is the minimum of the three margins (a different constant from
    ``StationaryConditionReport.c_const``). ``bound_value`` is None whenever
    the hypotheses fail or ``c_min <= 0``.
    """

    r0: float
    margins: tuple[float, float, float]
    c_min: float
    hypotheses_hold: bool
    bound_value: Optional[float]
    dfe_stochastically_stable: bool

    def rederive(self) -> bool:
        return self.r0 < 1.0 and all(m > 0.0 for m in self.margins)


@dataclass(frozen=True)
class ExtinctionReport:
    """Almost-sure extinction criterion for the infected compartment.

    ``exponent_bound`` is the upper bound on limsup ln Y(t)/t. With σ4 = 0 the
    right-hand side is infinite and extinction is never predicted.
    """

    lhs: float
    rhs: float
    exponent_bound: float
    predicts_extinction: bool

    @property
    def rhs_infinite(self) -> bool:
        return math.isinf(self.rhs)

    def rederive(self) -> bool:
        return self.lhs > self.rhs


def _d2_d3(p: ModelParams, n: NoiseIntensities) -> tuple[float, float]:
    k = 2 * p.mu + p.alpha
    d2 = p.mu + p.alpha - n.sigma2**2
    d3 = ((p.mu * (p.gamma + k) + p.eta * k) / p.gamma
          - (p.gamma + k) / p.gamma * n.sigma3**2)
    return d2, d3


def check_stationary(p: ModelParams, n: NoiseIntensities) -> StationaryConditionReport:
    eq = equilibria(p)
    d2, d3 = _d2_d3(p, n)
    if eq.ee is None:
        return StationaryConditionReport(r0=eq.r0, ee_defined=False, d1=None, d2=d2, d3=d3,
                                         c_const=None, bound=None, holds=False)
    xs, ys, zs = eq.ee.x, eq.ee.y, eq.ee.z
    k = 2 * p.mu + p.alpha
    s1, s2, s3, s4 = (s * s for s in n.as_tuple())
    d1 = p.mu / 2 - s1 - k * ys * s4 / p.beta
    c = (s1 * xs**2
         + (ys**2 + k / (2 * p.beta) * ys) * s2
         + (p.gamma + k) / p.gamma * zs**2 * s3
         + k / p.beta * xs**2 * ys * s4)
    bound = min(d1 * xs**2, d2 * ys**2, d3 * zs**2)
    holds = eq.r0 > 1.0 and 0.0 < c < bound
    return StationaryConditionReport(r0=eq.r0, ee_defined=True, d1=d1, d2=d2, d3=d3,
                                     c_const=c, bound=bound, holds=holds, ee=eq.ee)


def ellipticity_kappa(n: NoiseIntensities, ee: State) -> float:
    """Lower eigenvalue bound of the diffusion matrix at the endemic state.

    The σ4 contribution is a positive semi-definite rank-one term and is
    dropped, so this is min(σ1²X*², σ2²Y*², σ3²Z*²).
    """
    return min((n.sigma1 * ee.x) ** 2, (n.sigma2 * ee.y) ** 2, (n.sigma3 * ee.z) ** 2)


def check_dfe_bound(p: ModelParams, n: NoiseIntensities) -> DfeBoundReport:
    r0 = equilibria(p).r0
    k = 2 * p.mu + p.alpha
    margins = (
        p.mu / 2 - n.sigma1**2,
        p.mu + p.alpha - n.sigma2**2 / 2,
        (k * (p.mu + p.eta) + p.gamma * p.mu) / p.gamma - n.sigma3**2,
    )
    c_min = min(margins)
    hold = r0 < 1.0 and all(m > 0.0 for m in margins)
    bound = None
    if hold and c_min > 0.0:
        bound = n.sigma1**2 * p.lam**2 / (c_min * p.mu**2)
    # sigma1 == 0 with the remaining hypotheses: the DFE itself is stable
    stable = hold and n.sigma1 == 0.0
    return DfeBoundReport(r0=r0, margins=margins, c_min=c_min, hypotheses_hold=hold,
                          bound_value=bound, dfe_stochastically_stable=stable)


def check_extinction(p: ModelParams, n: NoiseIntensities) -> ExtinctionReport:
    lhs = p.alpha + p.mu + p.gamma + n.sigma2**2 / 2
    s4sq = n.sigma4**2
    # a denormal σ4 squares to zero; treat it like σ4 = 0
    rhs = p.beta**2 / (2 * s4sq) if s4sq > 0 else math.inf
    return ExtinctionReport(lhs=lhs, rhs=rhs, exponent_bound=rhs - lhs,
                            predicts_extinction=lhs > rhs)


def extinction_sigma4_threshold(p: ModelParams, sigma2: float) -> float:
    """Smallest σ4 above which extinction is predicted, for fixed σ2."""
    return p.beta / math.sqrt(2 * (p.alpha + p.mu + p.gamma) + sigma2**2)
