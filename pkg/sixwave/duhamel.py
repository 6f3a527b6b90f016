"""The Lambda time-integral map and Picard solvers for mild solutions.

Trajectories store g(t) = T^{-t} f(t), so the mild formulation reads
g(t) = f0 + Lambda_{0,t}[g] with

    Lambda_{a,b}[g] = int_a^b T^{-s} C[T^s g(s)] ds.

Whole trajectories are iterated at once; inside a sweep the transported
collision integrand at each time node is independent of the others.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Final, Literal

import numpy as np
import numpy.typing as npt
from scipy.integrate import cumulative_trapezoid

from sixwave import constants
from sixwave.bounds import thresholds
from sixwave.collision import QuadratureSpec, collision_field
from sixwave.core import (
    Field,
    FloatArray,
    PhaseGrid,
    Trajectory,
    WeightParams,
    maxwellian,
    transport,
    weighted_norm,
    weighted_sup,
)
from sixwave.exceptions import RegimeError, TailPolicyError
from sixwave.parallel import map_nodes

if TYPE_CHECKING:
    from sixwave.kaniel_shinbrot import KsState

logger = logging.getLogger(__name__)

NODE: Final = "t"
Endpoint = float | Literal["t"]
NodeKernel = Callable[[Field, PhaseGrid, QuadratureSpec, float], FloatArray]


@dataclass(frozen=True)
class SolverConfig:
    """Time grid, tolerances and quadrature shared by every solver.

    Attributes:
        time_grid: Increasing times containing 0; may include negative times
        quadrature: Phase grid and angular resolution
        picard_tol: Stop when the triple norm of successive differences drops below this
        scatter_tol: Tail tolerance for scattering horizons
        max_iters: Iteration cap
        center_on_maxwellian: Route picard_solve to the Maxwellian-centered solver
        enforce_thresholds: Refuse data outside the certified regime
        slack: Multiplicative slack on the analytic inequalities
        max_workers: Parallel workers over time nodes
        max_doublings: Horizon doublings allowed for scattering
    """

    time_grid: FloatArray
    quadrature: QuadratureSpec
    picard_tol: float
    scatter_tol: float
    max_iters: int = constants.DEFAULT_MAX_ITERS
    center_on_maxwellian: bool = False
    enforce_thresholds: bool = True
    slack: float = constants.DEFAULT_SLACK
    max_workers: int = 1
    max_doublings: int = constants.DEFAULT_MAX_DOUBLINGS

    def __post_init__(self) -> None:
        """Validate the configuration."""
        times = np.array(self.time_grid, dtype=float)
        times.setflags(write=False)
        object.__setattr__(self, "time_grid", times)
        if times.ndim != 1 or times.size < 1:
            raise ValueError("time_grid must be a nonempty 1-D array")
        if not np.all(np.diff(times) > 0):
            raise ValueError("time_grid must be strictly increasing")
        if not np.any(times == 0.0):
            raise ValueError("time_grid must contain 0")
        if not self.picard_tol > 0:
            raise ValueError(f"picard_tol must be positive, got {self.picard_tol}")
        if not self.scatter_tol > 0:
            raise ValueError(f"scatter_tol must be positive, got {self.scatter_tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if not self.slack >= 1:
            raise ValueError(f"slack must be at least 1, got {self.slack}")
        if self.max_workers < 1:
            raise ValueError(f"max_workers must be positive, got {self.max_workers}")
        if self.max_doublings < 0:
            raise ValueError(f"max_doublings must be non-negative, got {self.max_doublings}")

    @classmethod
    def for_weights(
        cls,
        w: WeightParams,
        *,
        nx: int = constants.DEFAULT_NX,
        nv: int = constants.DEFAULT_NV,
        n_theta: int = constants.DEFAULT_N_THETA,
        t_min: float = constants.DEFAULT_T_MIN,
        t_max: float = constants.DEFAULT_T_MAX,
        nt: int = constants.DEFAULT_NT,
        picard_tol: float | None = None,
        scatter_tol: float | None = None,
        **kwargs: object,
    ) -> SolverConfig:
        """Build a config with tolerances scaled by the regime radii of `w`."""
        th = thresholds(w)
        return cls(
            time_grid=time_nodes(t_min, t_max, nt),
            quadrature=QuadratureSpec.for_weights(w, nx=nx, nv=nv, n_theta=n_theta),
            picard_tol=picard_tol if picard_tol is not None else constants.PICARD_TOL_FACTOR * th.r_e,
            scatter_tol=scatter_tol if scatter_tol is not None else constants.SCATTER_TOL_FACTOR * th.r_s,
            **kwargs,  # type: ignore[arg-type]
        )

    @property
    def grid(self) -> PhaseGrid:
        return self.quadrature.phase_grid()

    def with_time_grid(self, times: npt.ArrayLike) -> SolverConfig:
        return dataclasses.replace(self, time_grid=np.asarray(times, dtype=float))


def time_nodes(t_min: float, t_max: float, nt: int) -> FloatArray:
    """nt uniform nodes on [t_min, t_max]; 0 is inserted when it is not a node."""
    if nt < 1:
        raise ValueError(f"nt must be positive, got {nt}")
    if not t_min <= 0 <= t_max:
        raise ValueError(f"time grid [{t_min}, {t_max}] must contain 0")
    if nt == 1:
        if t_min != 0 or t_max != 0:
            raise ValueError("a single time node must be t = 0")
        return np.zeros(1)
    times = np.linspace(t_min, t_max, nt)
    near = np.argmin(np.abs(times))
    if abs(times[near]) <= 1e-12 * max(abs(t_min), abs(t_max)):
        times[near] = 0.0
        return times
    return np.union1d(times, [0.0])


@dataclass(frozen=True)
class Solution:
    """A mild solution on the time grid and its fixed-point diagnostics.

    `trajectory` stores g(t) = T^{-t} f(t); `physical(k)` returns f(t_k).
    """

    trajectory: Trajectory
    residual_history: FloatArray
    contraction_ratios: FloatArray
    converged: bool
    iterations: int
    ball_radius: float | None = None
    band_respected: bool | None = None
    brackets: KsState | None = None

    def physical(self, index: int) -> Field:
        return transport(self.trajectory.fields[index], float(self.trajectory.times[index]))


# =============================================================================
# Node-level kernels
# =============================================================================


def node_map(
    values: FloatArray,
    times: FloatArray,
    cfg: SolverConfig,
    w: WeightParams,
    kernel: NodeKernel = collision_field,
) -> FloatArray:
    """Evaluate a transported kernel at every time node; values has shape (nt, nx, nv)."""
    grid = cfg.grid

    def one(k: int) -> FloatArray:
        return kernel(Field.from_grid(grid, values[k], w), grid, cfg.quadrature, float(times[k]))

    return np.stack(map_nodes(one, range(times.size), cfg.max_workers))


def integral_from_zero(integrand: FloatArray, times: FloatArray) -> FloatArray:
    """Trapezoid integral from 0 to every node (signed for negative times)."""
    if times.size == 1:
        return np.zeros_like(integrand)
    cum = cumulative_trapezoid(integrand, times, axis=0, initial=0.0)
    zero = int(np.flatnonzero(times == 0.0)[0])
    return np.asarray(cum - cum[zero])


def node_sup(values: FloatArray, cfg: SolverConfig, w: WeightParams) -> float:
    """Discrete triple norm of an (nt, nx, nv) array."""
    return float(np.max(weighted_sup(values, cfg.grid, w)))


# =============================================================================
# Lambda map
# =============================================================================


def _resolve(endpoint: Endpoint, times: FloatArray, truncate_infinite: bool) -> FloatArray | None:
    if endpoint == NODE:
        return None
    value = float(endpoint)
    if math.isinf(value) and truncate_infinite:
        value = float(times[-1] if value > 0 else times[0])
    span = 1e-12 * max(1.0, float(np.max(np.abs(times))))
    if not times[0] - span <= value <= times[-1] + span:
        raise TailPolicyError(
            f"needs tail policy: endpoint {endpoint} lies outside the time grid [{times[0]}, {times[-1]}]"
        )
    return np.full(times.size, min(max(value, float(times[0])), float(times[-1])))


def _at(cumulative: FloatArray, times: FloatArray, points: FloatArray | None) -> FloatArray:
    if points is None:
        return cumulative
    flat = cumulative.reshape(times.size, -1)
    out = np.stack([np.interp(points[0], times, flat[:, p]) for p in range(flat.shape[1])], axis=-1)
    return np.broadcast_to(out.reshape(cumulative.shape[1:]), cumulative.shape)


def lambda_values(
    values: FloatArray,
    times: FloatArray,
    a: Endpoint,
    b: Endpoint,
    cfg: SolverConfig,
    w: WeightParams,
    *,
    truncate_infinite: bool = False,
) -> FloatArray:
    """Array form of `lambda_map`."""
    pa = _resolve(a, times, truncate_infinite)
    pb = _resolve(b, times, truncate_infinite)
    if (pa is None and pb is None) or (pa is not None and pb is not None and pa[0] == pb[0]):
        return np.zeros_like(values)
    cumulative = integral_from_zero(node_map(values, times, cfg, w), times)
    return np.asarray(_at(cumulative, times, pb) - _at(cumulative, times, pa))


def lambda_map(
    g: Trajectory,
    a: Endpoint,
    b: Endpoint,
    cfg: SolverConfig,
    w: WeightParams,
    *,
    truncate_infinite: bool = False,
) -> Trajectory:
    """Lambda_{a,b}[g] at every time node of g.

    Either endpoint may be a time or `NODE`, meaning the output node t; so
    Lambda_{0,t} is `lambda_map(g, 0.0, NODE, ...)` and Lambda_{t,inf} is
    `lambda_map(g, NODE, math.inf, ..., truncate_infinite=True)`.

    Raises:
        TailPolicyError: an endpoint outside the grid, or infinite without `truncate_infinite`
    """
    grid = cfg.grid
    out = lambda_values(g.values(grid), g.times, a, b, cfg, w, truncate_infinite=truncate_infinite)
    return Trajectory.from_values(g.times, grid, out, w)


# =============================================================================
# Picard iteration
# =============================================================================


FixedPointMap = Callable[[FloatArray], FloatArray]


def iterate_fixed_point(
    step: FixedPointMap,
    seed: FloatArray,
    cfg: SolverConfig,
    w: WeightParams,
    label: str,
) -> tuple[FloatArray, FloatArray, FloatArray, bool, int]:
    """Iterate `step` from `seed` until the discrete triple norm of the update drops below picard_tol.

    Returns:
        (fixed point, residual history, contraction ratios, converged, iterations)
    """
    current = seed
    residuals: list[float] = []
    converged = False
    for n in range(1, cfg.max_iters + 1):
        nxt = step(current)
        residual = node_sup(nxt - current, cfg, w)
        residuals.append(residual)
        current = nxt
        logger.debug("%s iteration %d: residual %.3e", label, n, residual)
        if residual < cfg.picard_tol:
            converged = True
            break
    history = np.array(residuals)
    prev = history[:-1]
    ratios = np.divide(history[1:], prev, out=np.zeros_like(prev), where=prev > 0)
    if converged:
        logger.info("%s converged after %d iterations (residual %.3e)", label, len(residuals), residuals[-1])
    else:
        message = f"{label} did not converge in {cfg.max_iters} iterations (residual {residuals[-1]:.3e})"
        logger.warning(message)
        warnings.warn(message, UserWarning, stacklevel=3)
    return current, history, ratios, converged, len(residuals)


def _check_small_data(f0: Field, w: WeightParams, cfg: SolverConfig, radius: float, label: str) -> None:
    if not cfg.enforce_thresholds:
        return
    norm = weighted_norm(f0, w, cfg.grid)
    if norm > radius:
        raise RegimeError(f"outside {label} regime: weighted norm {norm:.6g} exceeds {radius:.6g}")


def _duhamel_step(f0_values: FloatArray, cfg: SolverConfig, w: WeightParams) -> FixedPointMap:
    times = cfg.time_grid

    def step(g: FloatArray) -> FloatArray:
        return f0_values[None] + lambda_values(g, times, 0.0, NODE, cfg, w)

    return step


def picard_solve(f0: Field, w: WeightParams, cfg: SolverConfig) -> Solution:
    """Fixed point of g -> f0 + Lambda_{0,t}[g] seeded at g = f0.

    Raises:
        RegimeError: weighted norm of f0 above r_e while enforcing thresholds
    """
    if cfg.center_on_maxwellian:
        return picard_solve_centered(f0, w, cfg)
    _check_small_data(f0, w, cfg, thresholds(w).r_e, "small-data")
    grid = cfg.grid
    times = cfg.time_grid
    f0_values = f0.sample(grid)
    seed = np.broadcast_to(f0_values, (times.size, *grid.shape)).copy()
    values, history, ratios, converged, n = iterate_fixed_point(
        _duhamel_step(f0_values, cfg, w), seed, cfg, w, "picard"
    )
    return Solution(Trajectory.from_values(times, grid, values, w), history, ratios, converged, n)


def picard_solve_centered(f0: Field, w: WeightParams, cfg: SolverConfig) -> Solution:
    """Picard iteration seeded at the Maxwellian, inside a ball around M.

    The radius r_p is 1/6 when the data lies within it and the upper end of
    the admissible interval otherwise. In the nonnegative regime the result
    records whether (1 - 2 r_p) M <= g(t) <= (1 + 2 r_p) M held at every node.

    Raises:
        RegimeError: empty r_p interval, or f0 outside the r_p ball around M
    """
    th = thresholds(w)
    if th.r_p_interval is None:
        raise RegimeError("centered regime unavailable for these weights")
    grid = cfg.grid
    times = cfg.time_grid
    M = maxwellian(w)
    lo, hi = th.r_p_interval
    distance = weighted_norm(f0 - M, w, grid)
    if distance < lo:
        r_p = lo
    elif distance < hi:
        r_p = hi
    else:
        raise RegimeError(f"outside centered regime: distance {distance:.6g} to M is not below {hi:.6g}")

    m_values = M.sample(grid)
    seed = np.broadcast_to(m_values, (times.size, *grid.shape)).copy()
    values, history, ratios, converged, n = iterate_fixed_point(
        _duhamel_step(f0.sample(grid), cfg, w), seed, cfg, w, "centered picard"
    )
    logger.debug("centered solution: distance to M %.3e (r_p=%.4f)", node_sup(values - m_values[None], cfg, w), r_p)
    band: bool | None = None
    if th.nonneg_regime:
        lo_band = (1.0 - 2.0 * r_p) * m_values[None]
        hi_band = (1.0 + 2.0 * r_p) * m_values[None]
        band = bool(np.all(values >= lo_band) and np.all(values <= hi_band))
    return Solution(
        Trajectory.from_values(times, grid, values, w),
        history,
        ratios,
        converged,
        n,
        ball_radius=r_p,
        band_respected=band,
    )


def stability(f0: Field, g0: Field, w: WeightParams, cfg: SolverConfig) -> float:
    """Ratio of the solution distance to the initial distance; 0 when f0 = g0."""
    grid = cfg.grid
    initial = weighted_norm(f0 - g0, w, grid)
    if initial == 0.0:
        return 0.0
    a = picard_solve(f0, w, cfg)
    b = picard_solve(g0, w, cfg)
    return node_sup(a.trajectory.values(grid) - b.trajectory.values(grid), cfg, w) / initial


def duhamel_residual(solution: Solution, f0: Field, w: WeightParams, cfg: SolverConfig) -> float:
    """Discrete triple norm of g(t) - f0 - Lambda_{0,t}[g] for a computed solution."""
    grid = cfg.grid
    traj = solution.trajectory
    g = traj.values(grid)
    return node_sup(g - f0.sample(grid)[None] - lambda_values(g, traj.times, 0.0, NODE, cfg, w), cfg, w)
