"""Stochastic SIRS model toolkit."""

__version__ = "0.1.0"

from .conditions import (check_dfe_bound, check_extinction, check_stationary,
                         ellipticity_kappa, extinction_sigma4_threshold)
from .core import (ModelParams, NoiseIntensities, State, basic_reproduction_number,
                   equilibria, baseline_params)
from .ensemble import EnsembleConfig, run_ensemble
from .integrate import PositivityPolicy, Scheme, SimConfig, TrajectoryAborted, simulate

__all__ = [
    "ModelParams", "NoiseIntensities", "State", "basic_reproduction_number", "equilibria",
    "baseline_params", "check_stationary", "check_dfe_bound", "check_extinction",
    "ellipticity_kappa", "extinction_sigma4_threshold", "Scheme", "PositivityPolicy",
    "SimConfig", "TrajectoryAborted", "simulate", "EnsembleConfig", "run_ensemble",
]
