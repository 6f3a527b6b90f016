"""Scattering states f_+- and the wave maps between them and initial data.

Infinite horizons are truncated at T and T is doubled (node count doubled at
fixed spacing) until the state moves by less than scatter_tol. Each horizon
also gets a tail bound from the collision majorant,

    |increment| <= 12 |||g|||^5 sup int Gamma ds,

which is recorded alongside the measured increment.
"""

from __future__ import annotations

import dataclasses
import logging
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import numpy as np

from sixwave.bounds import COLLISION_MAJORANT_FACTOR, gamma_majorant, thresholds
from sixwave.core import Field, FloatArray, WeightParams, weighted_norm, weighted_sup
from sixwave.duhamel import (
    NODE,
    FixedPointMap,
    SolverConfig,
    iterate_fixed_point,
    lambda_values,
    node_sup,
    picard_solve,
)
from sixwave.exceptions import ConfigError, RegimeError

logger = logging.getLogger(__name__)


class Direction(str, Enum):
    """Time direction of a scattering state."""

    PLUS = "+"
    MINUS = "-"

    @property
    def sign(self) -> float:
        return 1.0 if self is Direction.PLUS else -1.0

    @classmethod
    def parse(cls, value: str | Direction) -> Direction:
        """Accept '+', '-', 'plus' or 'minus'."""
        if isinstance(value, Direction):
            return value
        text = str(value).strip().lower()
        aliases = {"+": cls.PLUS, "plus": cls.PLUS, "-": cls.MINUS, "minus": cls.MINUS}
        if text not in aliases:
            raise ValueError(f"direction must be one of +, -, plus, minus, got {value!r}")
        return aliases[text]


@dataclass(frozen=True)
class ScatteringResult:
    """A scattering state together with its horizon diagnostics.

    Attributes:
        state: f_+ or f_- (forward_limit), or f0 (inverse_wave_result)
        tail_time: Horizon |T| at which the tail increment fell below scatter_tol
        convergence_history: Rows (t, ||T^{-t} f(t) - state||) ordered by |t|
        direction: PLUS or MINUS
        converged: Tail and fixed point both reached their tolerances
        contraction_ratios: Successive residual ratios of the last fixed-point solve
        tail_increment: Change of the state over the last horizon doubling
        tail_bound: Collision-majorant bound on that change
        tail_certified: tail_increment <= tail_bound
    """

    state: Field
    tail_time: float
    convergence_history: FloatArray
    direction: Direction
    converged: bool
    contraction_ratios: FloatArray
    tail_increment: float
    tail_bound: float
    tail_certified: bool


# =============================================================================
# Horizons
# =============================================================================


def _nominal_spacing(times: FloatArray) -> float:
    """Step of the uniform grid the time nodes came from, ignoring an inserted t = 0."""
    span = float(times[-1] - times[0])
    uniform = span / (times.size - 1)
    if times.size < 3 or np.allclose(np.diff(times), uniform, rtol=1e-9, atol=0.0):
        return uniform
    return span / (times.size - 2)


def _horizons(cfg: SolverConfig, direction: Direction) -> Iterator[FloatArray]:
    """Time grids [0, T], [0, 2T], ... (reflected for MINUS) at the configured spacing."""
    times = cfg.time_grid
    extent = float(max(abs(times[0]), abs(times[-1])))
    if times.size < 2 or extent == 0.0:
        raise ConfigError("scattering needs a time grid with positive extent")
    spacing = extent / max(int(round(extent / _nominal_spacing(times))), 1)
    intervals = int(round(extent / spacing))
    for _ in range(cfg.max_doublings + 1):
        nodes = np.linspace(0.0, intervals * spacing, intervals + 1)
        yield nodes if direction is Direction.PLUS else -nodes[::-1]
        intervals *= 2


def _far_index(times: FloatArray, direction: Direction) -> int:
    return times.size - 1 if direction is Direction.PLUS else 0


def _tail_bound(values: FloatArray, times: FloatArray, cfg: SolverConfig, w: WeightParams) -> float:
    """Collision-majorant bound on the change of the state over the second half of the horizon."""
    rho = node_sup(values, cfg, w)
    if rho == 0.0:
        return 0.0
    far = float(times[-1] if abs(times[-1]) >= abs(times[0]) else times[0])
    window = gamma_majorant(0.5 * far, far, w, cfg.quadrature)
    return COLLISION_MAJORANT_FACTOR * rho**5 * window * cfg.slack


def _history(
    values: FloatArray, state: FloatArray, times: FloatArray, cfg: SolverConfig, w: WeightParams
) -> FloatArray:
    defects = weighted_sup(values - state[None], cfg.grid, w)
    order = np.argsort(np.abs(times), kind="stable")
    return np.column_stack([times[order], defects[order]])


def _check_radius(f: Field, w: WeightParams, cfg: SolverConfig, radius: float) -> None:
    if not cfg.enforce_thresholds:
        return
    norm = weighted_norm(f, w, cfg.grid)
    if norm > radius:
        raise RegimeError(f"outside scattering regime: weighted norm {norm:.6g} exceeds {radius:.6g}")


def _report(label: str, converged: bool, tail_time: float, increment: float) -> None:
    if converged:
        logger.info("%s converged with horizon %.6g (tail increment %.3e)", label, tail_time, increment)
        return
    message = f"{label} did not converge: tail increment {increment:.3e} at horizon {tail_time:.6g}"
    logger.warning(message)
    warnings.warn(message, UserWarning, stacklevel=3)


# =============================================================================
# Wave maps
# =============================================================================


def forward_limit(
    f0: Field, w: WeightParams, cfg: SolverConfig, direction: Direction | str = Direction.PLUS
) -> ScatteringResult:
    """Scattering state f_+- = lim T^{-t} f(t) as t -> +-inf.

    At horizon T the state is g(+-T) = f0 + Lambda_{0,+-T}[g]; its tail
    increment is the change from the node at T/2.

    Raises:
        RegimeError: weighted norm of f0 above r_s while enforcing thresholds
    """
    direction = Direction.parse(direction)
    _check_radius(f0, w, cfg, thresholds(w).r_s)
    grid = cfg.grid
    base = dataclasses.replace(cfg, center_on_maxwellian=False)

    result: ScatteringResult | None = None
    for times in _horizons(cfg, direction):
        solution = picard_solve(f0, w, base.with_time_grid(times))
        values = solution.trajectory.values(grid)
        far = _far_index(times, direction)
        half = int(np.argmin(np.abs(times - 0.5 * times[far])))
        state = values[far]
        increment = float(weighted_sup(state - values[half], grid, w))
        bound = _tail_bound(values, times, cfg, w)
        tail_time = float(abs(times[far]))
        logger.debug("forward horizon %.6g: tail increment %.3e (bound %.3e)", tail_time, increment, bound)
        converged = increment < cfg.scatter_tol
        result = ScatteringResult(
            state=Field.from_grid(grid, state, w),
            tail_time=tail_time,
            convergence_history=_history(values, state, times, cfg, w),
            direction=direction,
            converged=converged and solution.converged,
            contraction_ratios=solution.contraction_ratios,
            tail_increment=increment,
            tail_bound=bound,
            tail_certified=increment <= bound or increment == 0.0,
        )
        if converged:
            break
    assert result is not None
    _report(f"forward limit ({direction.value})", result.converged, result.tail_time, result.tail_increment)
    return result


def _inverse_step(
    f_values: FloatArray, times: FloatArray, cfg: SolverConfig, w: WeightParams, direction: Direction
) -> FixedPointMap:
    if direction is Direction.PLUS:

        def step(g: FloatArray) -> FloatArray:
            return f_values[None] - lambda_values(g, times, NODE, float(times[-1]), cfg, w)

    else:

        def step(g: FloatArray) -> FloatArray:
            return f_values[None] + lambda_values(g, times, float(times[0]), NODE, cfg, w)

    return step


def inverse_wave_result(
    f_pm: Field, w: WeightParams, cfg: SolverConfig, direction: Direction | str = Direction.PLUS
) -> ScatteringResult:
    """Initial data whose solution scatters to `f_pm`, with diagnostics.

    Solves g = f_+ - Lambda_{t,T}[g] (or g = f_- + Lambda_{-T,t}[g]) on
    growing horizons and returns g(0). The tail increment is the change of
    g(0) between consecutive horizons.

    Raises:
        RegimeError: weighted norm of f_pm above r_s while enforcing thresholds
    """
    direction = Direction.parse(direction)
    _check_radius(f_pm, w, cfg, thresholds(w).r_s)
    grid = cfg.grid
    f_values = f_pm.sample(grid)

    result: ScatteringResult | None = None
    previous: FloatArray | None = None
    for times in _horizons(cfg, direction):
        run = cfg.with_time_grid(times)
        seed = np.broadcast_to(f_values, (times.size, *grid.shape)).copy()
        values, _, ratios, solved, _ = iterate_fixed_point(
            _inverse_step(f_values, times, run, w, direction), seed, run, w, f"inverse wave ({direction.value})"
        )
        zero = int(np.flatnonzero(times == 0.0)[0])
        state = values[zero]
        increment = float("inf") if previous is None else float(weighted_sup(state - previous, grid, w))
        bound = _tail_bound(values, times, cfg, w)
        tail_time = float(np.max(np.abs(times)))
        logger.debug("inverse horizon %.6g: tail increment %.3e (bound %.3e)", tail_time, increment, bound)
        converged = increment < cfg.scatter_tol
        result = ScatteringResult(
            state=Field.from_grid(grid, state, w),
            tail_time=tail_time,
            convergence_history=_history(values, state, times, cfg, w),
            direction=direction,
            converged=converged and solved,
            contraction_ratios=ratios,
            tail_increment=increment,
            tail_bound=bound,
            # the fixed point amplifies a tail change by at most 1 / (1 - 1/4)
            tail_certified=increment <= 2.0 * bound or increment == 0.0,
        )
        if converged:
            break
        previous = state
    assert result is not None
    _report(f"inverse wave ({direction.value})", result.converged, result.tail_time, result.tail_increment)
    return result


def inverse_wave(
    f_pm: Field, w: WeightParams, cfg: SolverConfig, direction: Direction | str = Direction.PLUS
) -> Field:
    """Initial data f0 whose solution scatters to `f_pm`."""
    return inverse_wave_result(f_pm, w, cfg, direction).state


def roundtrip(
    f_pm: Field, w: WeightParams, cfg: SolverConfig, direction: Direction | str = Direction.PLUS
) -> float:
    """Weighted distance between forward_limit(inverse_wave(f_pm)) and f_pm.

    Raises:
        RegimeError: weighted norm of f_pm above r_s / 2 while enforcing thresholds
    """
    direction = Direction.parse(direction)
    _check_radius(f_pm, w, cfg, 0.5 * thresholds(w).r_s)
    f0 = inverse_wave(f_pm, w, cfg, direction)
    back = forward_limit(f0, w, cfg, direction).state
    return weighted_norm(back - f_pm, w, cfg.grid)


def scattering_operator(f_minus: Field, w: WeightParams, cfg: SolverConfig) -> Field:
    """Two-sided map f_- -> f_+ through the initial data.

    Raises:
        RegimeError: weighted norm of f_minus above r_s / 2 while enforcing thresholds
    """
    _check_radius(f_minus, w, cfg, 0.5 * thresholds(w).r_s)
    f0 = inverse_wave(f_minus, w, cfg, Direction.MINUS)
    return forward_limit(f0, w, cfg, Direction.PLUS).state
