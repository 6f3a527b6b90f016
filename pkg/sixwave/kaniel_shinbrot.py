"""Associated linear problem and the monotone Kaniel-Shinbrot bracketing.

The brackets obey

    d/dt T^{-t} l_n = T^{-t} G[l_{n-1}] - T^{-t} l_n T^{-t} R[u_{n-1}],
    d/dt T^{-t} u_n = T^{-t} G[u_{n-1}] - T^{-t} u_n T^{-t} R[l_{n-1}],

with l_n(0) = u_n(0) = f0, starting from l_0 = 0 and T^{-t} u_0 = C_0 M.
Both are linear in the new iterate and solved with an integrating factor.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from sixwave.bounds import thresholds
from sixwave.collision import gain_field, loss_rate_field
from sixwave.core import Field, FloatArray, PhaseGrid, Trajectory, WeightParams, weighted_norm
from sixwave.duhamel import Solution, SolverConfig, integral_from_zero, node_map, node_sup
from sixwave.exceptions import BeginningConditionError, ConfigError, RegimeError

logger = logging.getLogger(__name__)

# Upper bracket scale C_0 = (20/19) ||f0||
UPPER_SCALE = 20.0 / 19.0

# Pointwise order checks allow this much rounding relative to C_0
ORDER_TOLERANCE = 1e-12


@dataclass(frozen=True)
class KsState:
    """Brackets T^{-t} l_n and T^{-t} u_n after n sweeps.

    Attributes:
        lower: T^{-t} l_n
        upper: T^{-t} u_n
        n: Sweeps performed
        gap_history: Triple norm of u_k - l_k for k = 1..n
        sandwich_violation: Largest weighted breach of l_{k-1} <= l_k <= u_k <= u_{k-1} seen
        min_gap_nodes: Time node of the smallest margin u_k - l_k, per sweep
    """

    lower: Trajectory
    upper: Trajectory
    n: int
    gap_history: FloatArray
    sandwich_violation: float
    min_gap_nodes: tuple[int, ...]


def _check_forward(cfg: SolverConfig) -> FloatArray:
    times = cfg.time_grid
    if times[0] < 0:
        raise ConfigError(f"Kaniel-Shinbrot runs forward in time only; time grid starts at {times[0]}")
    return times


def gain_trajectory(g: Trajectory, w: WeightParams, cfg: SolverConfig) -> Trajectory:
    """T^{-t} G[T^t g(t)] at every time node."""
    grid = cfg.grid
    out = node_map(g.values(grid), g.times, cfg, w, gain_field)
    return Trajectory.from_values(g.times, grid, out, w)


def loss_rate_trajectory(g: Trajectory, w: WeightParams, cfg: SolverConfig) -> Trajectory:
    """T^{-t} R[T^t g(t)] at every time node."""
    grid = cfg.grid
    out = node_map(g.values(grid), g.times, cfg, w, loss_rate_field)
    return Trajectory.from_values(g.times, grid, out, w)


def _alp_values(f0: FloatArray, rate: FloatArray, source: FloatArray, times: FloatArray) -> FloatArray:
    """F(t) = f0 e^{-P(t)} + int_0^t e^{P(s) - P(t)} h(s) ds with P the integral of the rate."""
    if times.size == 1:
        return f0[None].copy()
    P = cumulative_trapezoid(rate, times, axis=0, initial=0.0)
    inner = cumulative_trapezoid(np.exp(P) * source, times, axis=0, initial=0.0)
    return np.asarray(np.exp(-P) * (f0[None] + inner))


def alp_solve(f0: Field, g: Trajectory, h: Trajectory, w: WeightParams, cfg: SolverConfig) -> Trajectory:
    """Mild solution of d/dt T^{-t} f = T^{-t} h - T^{-t} f T^{-t} R[g], f(0) = f0.

    `g` and `h` hold the transported fields T^{-t} g(t) and T^{-t} h(t).

    Raises:
        RegimeError: f0, g or h negative at some node
        ConfigError: negative times on the grid
    """
    times = _check_forward(cfg)
    grid = cfg.grid
    f0_values = f0.sample(grid)
    g_values = g.values(grid)
    h_values = h.values(grid)
    for name, arr in (("f0", f0_values), ("g", g_values), ("h", h_values)):
        if np.any(arr < 0):
            raise RegimeError(f"ALP requires nonnegative data: {name} has minimum {arr.min():.6g}")
    rate = node_map(g_values, times, cfg, w, loss_rate_field)
    return Trajectory.from_values(times, grid, _alp_values(f0_values, rate, h_values, times), w)


def _order_violation(
    chain: list[FloatArray], grid: PhaseGrid, w: WeightParams
) -> tuple[float, tuple[int, int, int]]:
    """Largest weighted breach of chain[0] <= chain[1] <= ... and its (t, x, v) index."""
    worst = 0.0
    where = (0, 0, 0)
    X, V = grid.mesh()
    weight = w.weight(X, V)
    for lo, hi in zip(chain[:-1], chain[1:]):
        breach = np.maximum(lo - hi, 0.0) * weight
        idx = np.unravel_index(int(np.argmax(breach)), breach.shape)
        if breach[idx] > worst:
            worst = float(breach[idx])
            where = (int(idx[0]), int(idx[1]), int(idx[2]))
    return worst, where


def _min_gap_node(lower: FloatArray, upper: FloatArray, zero: int) -> int:
    margins = (upper - lower).reshape(lower.shape[0], -1).min(axis=1)
    if margins.size > 1:
        margins = margins.copy()
        margins[zero] = np.inf
    return int(np.argmin(margins))


def ks_solve(f0: Field, w: WeightParams, cfg: SolverConfig) -> Solution:
    """Non-negative mild solution as the common limit of the brackets.

    Raises:
        RegimeError: f0 negative, or its norm above r_ks while enforcing thresholds
        BeginningConditionError: 0 <= l_0 <= l_1 <= u_1 <= u_0 fails at some node
        ConfigError: negative times on the grid
    """
    times = _check_forward(cfg)
    grid = cfg.grid
    f0_values = f0.sample(grid)
    if np.any(f0_values < 0):
        raise RegimeError(f"ALP requires nonnegative data: f0 has minimum {f0_values.min():.6g}")
    norm = weighted_norm(f0, w, grid)
    r_ks = thresholds(w).r_ks
    if cfg.enforce_thresholds and norm > r_ks:
        raise RegimeError(f"outside KS regime: weighted norm {norm:.6g} exceeds r_ks = {r_ks:.6g}")

    c0 = UPPER_SCALE * norm
    tol = ORDER_TOLERANCE * max(c0, np.finfo(float).tiny)
    X, V = grid.mesh()
    lower = np.zeros((times.size, *grid.shape))
    upper = np.broadcast_to(c0 * w.gaussian(X, V), lower.shape).copy()
    zero = int(np.flatnonzero(times == 0.0)[0])

    def sweep(lo: FloatArray, up: FloatArray) -> tuple[FloatArray, FloatArray]:
        gain_lo = node_map(lo, times, cfg, w, gain_field)
        gain_up = node_map(up, times, cfg, w, gain_field)
        rate_lo = node_map(lo, times, cfg, w, loss_rate_field)
        rate_up = node_map(up, times, cfg, w, loss_rate_field)
        return _alp_values(f0_values, rate_up, gain_lo, times), _alp_values(f0_values, rate_lo, gain_up, times)

    lower_1, upper_1 = sweep(lower, upper)
    violation, (k, i, j) = _order_violation([lower, lower_1, upper_1, upper], grid, w)
    if violation > tol:
        details = {"t": float(times[k]), "x": float(grid.x[i]), "v": float(grid.v[j]), "violation": violation}
        raise BeginningConditionError(
            f"beginning condition violated: weighted breach {violation:.3e} at t={times[k]:.6g}, "
            f"x={grid.x[i]:.6g}, v={grid.v[j]:.6g}",
            details=details,
        )

    gaps: list[float] = []
    nodes: list[int] = []
    worst_violation = violation
    lower, upper = lower_1, upper_1
    converged = False
    for n in range(1, cfg.max_iters + 1):
        if n > 1:
            new_lower, new_upper = sweep(lower, upper)
            breach, _ = _order_violation([lower, new_lower, new_upper, upper], grid, w)
            worst_violation = max(worst_violation, breach)
            lower, upper = new_lower, new_upper
        gap = node_sup(upper - lower, cfg, w)
        gaps.append(gap)
        nodes.append(_min_gap_node(lower, upper, zero))
        logger.debug("ks sweep %d: gap %.3e", n, gap)
        if gap < cfg.picard_tol:
            converged = True
            break

    history = np.array(gaps)
    prev = history[:-1]
    ratios = np.divide(history[1:], prev, out=np.zeros_like(prev), where=prev > 0)
    if worst_violation > tol:
        logger.warning("sandwich ordering breached by %.3e (weighted)", worst_violation)
    if converged:
        logger.info("ks converged after %d sweeps (gap %.3e)", len(gaps), gaps[-1])
    else:
        message = f"ks did not converge in {cfg.max_iters} sweeps (gap {gaps[-1]:.3e})"
        logger.warning(message)
        warnings.warn(message, UserWarning, stacklevel=2)

    state = KsState(
        lower=Trajectory.from_values(times, grid, lower, w),
        upper=Trajectory.from_values(times, grid, upper, w),
        n=len(gaps),
        gap_history=history,
        sandwich_violation=worst_violation,
        min_gap_nodes=tuple(nodes),
    )
    return Solution(
        Trajectory.from_values(times, grid, 0.5 * (lower + upper), w),
        history,
        ratios,
        converged,
        len(gaps),
        brackets=state,
    )


def ks_identity_residuals(state: KsState, f0: Field, w: WeightParams, cfg: SolverConfig) -> tuple[float, float]:
    """Discrete triple norms of the integral identities satisfied by the limit brackets.

    l(t) = f0 + int_0^t (G[l] - l R[u]) and u(t) = f0 + int_0^t (G[u] - u R[l]),
    all fields transported.
    """
    grid = cfg.grid
    times = state.lower.times
    lo = state.lower.values(grid)
    up = state.upper.values(grid)
    f0_values = f0.sample(grid)[None]
    gain_lo = node_map(lo, times, cfg, w, gain_field)
    gain_up = node_map(up, times, cfg, w, gain_field)
    rate_lo = node_map(lo, times, cfg, w, loss_rate_field)
    rate_up = node_map(up, times, cfg, w, loss_rate_field)
    res_l = lo - f0_values - integral_from_zero(gain_lo - lo * rate_up, times)
    res_u = up - f0_values - integral_from_zero(gain_up - up * rate_lo, times)
    return node_sup(res_l, cfg, w), node_sup(res_u, cfg, w)

