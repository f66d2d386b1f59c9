"""Finite-volume simulator and estimate auditor for a 2D chemotaxis-haptotaxis
model with remodelling of a non-diffusible attractant."""

from .errors import (ConfigError, DegenerateDelta, GridMismatch, InfeasibleParameters,
                     InvalidInitialData, InvalidState, LinearSolveFailure)
from .model import Grid2D, ModelParams, State, SteadyState
from .spatial_ops import StencilConfig
from .stepper import StepOutcome, StepperConfig, run, stable_dt, step

__all__ = [
    "ConfigError", "DegenerateDelta", "GridMismatch", "InfeasibleParameters", "InvalidInitialData",
    "InvalidState", "LinearSolveFailure", "Grid2D", "ModelParams", "State", "SteadyState",
    "StencilConfig", "StepOutcome", "StepperConfig", "run", "stable_dt", "step",
]
