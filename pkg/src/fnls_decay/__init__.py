"""Solitary waves of the fractional nonlinear Schrodinger equation and the
algebraic decay of their profiles."""
from .diagnostics import decay_slope, invariants, limit_constants, profile_residual
from .kernels import eval_kernels, kernel_constants, kernel_tail_report
from .model import ModelParams, speed_bound, validate
from .solver import SolverConfig, extrapolate, initial_guess, solve_profile
from .spectral import Grid, ProfilePair, make_grid

__version__ = "0.1.0"

__all__ = [
    "Grid", "ModelParams", "ProfilePair", "SolverConfig", "decay_slope", "eval_kernels",
    "extrapolate", "initial_guess", "invariants", "kernel_constants", "kernel_tail_report",
    "limit_constants", "make_grid", "profile_residual", "solve_profile", "speed_bound",
    "validate",
]
