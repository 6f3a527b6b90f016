"""Solvers for the 1-D six-wave kinetic equation in Gaussian-weighted sup norms."""

# this version will be overwritten by poetry-dynamic-versioning
__version__ = "0.0.0"

from .bounds import Thresholds, thresholds
from .collision import QuadratureSpec, collide, kernel_I, parametrize
from .core import Field, PhaseGrid, Trajectory, WeightParams, maxwellian, transport, triple_norm, weighted_norm
from .duhamel import NODE, Solution, SolverConfig, lambda_map, picard_solve, picard_solve_centered, stability
from .exceptions import (
    BeginningConditionError,
    ConfigError,
    ConvergenceError,
    FieldError,
    QuadratureError,
    RegimeError,
    SixWaveError,
    TailPolicyError,
)
from .kaniel_shinbrot import KsState, alp_solve, ks_solve
from .scattering import Direction, ScatteringResult, forward_limit, inverse_wave, roundtrip, scattering_operator
