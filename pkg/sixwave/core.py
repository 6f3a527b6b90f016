"""Phase-space fields, weighted sup norms, the Maxwellian and free transport.

A `Field` is a function of (x, v) backed either by an analytic rule or by
values on a uniform tensor grid. Grid-backed fields evaluate between nodes
by bilinear interpolation and vanish outside the truncated box
[-Lx, Lx] x [-Lv, Lv]. When a grid field carries `WeightParams`, the
interpolation runs on the weighted values f * exp(alpha x^2 + beta v^2)
and the result is multiplied back by the Gaussian, which keeps every
multiple of the Maxwellian exact and makes the node sup of the weighted
values the sup of the interpolant.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import numpy.typing as npt
import pandas as pd
from scipy.interpolate import RegularGridInterpolator

from sixwave import constants
from sixwave.exceptions import FieldError

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
Rule = Callable[[FloatArray, FloatArray], FloatArray]


@dataclass(frozen=True)
class WeightParams:
    """Exponential weight rates (alpha, beta) and the derived truncation box.

    Attributes:
        alpha: Spatial weight rate (1/length^2)
        beta: Velocity weight rate (1/velocity^2)
        eps_tail: Tail tolerance; the box half-widths satisfy exp(-alpha Lx^2) <= eps_tail
        Lx: Optional spatial half-width override
        Lv: Optional velocity half-width override
    """

    alpha: float
    beta: float
    eps_tail: float = constants.DEFAULT_EPS_TAIL
    Lx: float | None = None
    Lv: float | None = None

    def __post_init__(self) -> None:
        """Validate rates and overrides."""
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not 0 < self.eps_tail < 1:
            raise ValueError(f"eps_tail must lie in (0, 1), got {self.eps_tail}")
        for name, rate, width in (("Lx", self.alpha, self.Lx), ("Lv", self.beta, self.Lv)):
            if width is None:
                continue
            if not width > 0:
                raise ValueError(f"{name} must be positive, got {width}")
            if rate * width * width < math.log(1.0 / self.eps_tail) * (1 - 1e-12):
                raise ValueError(
                    f"{name}={width} too small for eps_tail={self.eps_tail}: "
                    f"need exp(-rate*{name}^2) <= eps_tail"
                )

    @property
    def lx(self) -> float:
        """Spatial half-width of the truncation box."""
        if self.Lx is not None:
            return self.Lx
        return math.sqrt(math.log(1.0 / self.eps_tail) / self.alpha)

    @property
    def lv(self) -> float:
        """Velocity half-width of the truncation box."""
        if self.Lv is not None:
            return self.Lv
        return math.sqrt(math.log(1.0 / self.eps_tail) / self.beta)

    def weight(self, x: npt.ArrayLike, v: npt.ArrayLike) -> FloatArray:
        """Return exp(alpha x^2 + beta v^2)."""
        xa = np.asarray(x, dtype=float)
        va = np.asarray(v, dtype=float)
        with np.errstate(over="ignore"):
            return np.asarray(np.exp(self.alpha * xa * xa + self.beta * va * va))

    def gaussian(self, x: npt.ArrayLike, v: npt.ArrayLike) -> FloatArray:
        """Return exp(-alpha x^2 - beta v^2)."""
        xa = np.asarray(x, dtype=float)
        va = np.asarray(v, dtype=float)
        return np.asarray(np.exp(-self.alpha * xa * xa - self.beta * va * va))


def _readonly(values: npt.ArrayLike) -> FloatArray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PhaseGrid:
    """Uniform tensor grid of nodes x_i, v_j."""

    x: FloatArray
    v: FloatArray

    def __post_init__(self) -> None:
        """Check that both axes are uniform and strictly increasing."""
        for name in ("x", "v"):
            axis = _readonly(getattr(self, name))
            if axis.ndim != 1 or axis.size < 2:
                raise FieldError(f"grid axis {name} needs at least 2 nodes")
            steps = np.diff(axis)
            if not np.all(steps > 0):
                raise FieldError(f"grid axis {name} must be strictly increasing")
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
                raise FieldError(f"grid axis {name} must be uniform")
            object.__setattr__(self, name, axis)

    @classmethod
    def from_weights(cls, w: WeightParams, nx: int, nv: int) -> PhaseGrid:
        """Build the nx x nv grid covering the truncation box of `w`."""
        if nx < 2 or nv < 2:
            raise ValueError(f"nx and nv must be at least 2, got nx={nx}, nv={nv}")
        return cls(np.linspace(-w.lx, w.lx, nx), np.linspace(-w.lv, w.lv, nv))

    @property
    def hx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def hv(self) -> float:
        return float(self.v[1] - self.v[0])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.x.size, self.v.size)

    def mesh(self) -> tuple[FloatArray, FloatArray]:
        """Return (X, V) with ij indexing."""
        X, V = np.meshgrid(self.x, self.v, indexing="ij")
        return X, V

    def same_as(self, other: PhaseGrid) -> bool:
        return self is other or (np.array_equal(self.x, other.x) and np.array_equal(self.v, other.v))


class Field:
    """A function of (x, v), rule-backed or grid-backed. Immutable."""

    __slots__ = ("_rule", "_grid", "_values", "_weights", "_interp")

    def __init__(
        self,
        rule: Rule | None = None,
        grid: PhaseGrid | None = None,
        values: FloatArray | None = None,
        weights: WeightParams | None = None,
    ) -> None:
        """Create a field; prefer `from_rule`, `from_grid` or `constant`."""
        if (rule is None) == (grid is None):
            raise ValueError("exactly one of rule or grid must be given")
        self._rule = rule
        self._grid = grid
        self._weights = weights
        self._values: FloatArray | None = None
        self._interp: RegularGridInterpolator | None = None
        if grid is not None:
            if values is None:
                raise ValueError("grid backing needs values")
            vals = _readonly(values)
            if vals.shape != grid.shape:
                raise FieldError(f"values shape {vals.shape} does not match grid shape {grid.shape}")
            if not np.all(np.isfinite(vals)):
                raise FieldError("non-finite field")
            self._values = vals
            data = vals
            if weights is not None:
                X, V = grid.mesh()
                data = vals * weights.weight(X, V)
            self._interp = RegularGridInterpolator(
                (grid.x, grid.v), data, method="linear", bounds_error=False, fill_value=0.0
            )

    @classmethod
    def from_rule(cls, rule: Rule) -> Field:
        """Analytic backing: `rule` takes broadcastable arrays x, v."""
        return cls(rule=rule)

    @classmethod
    def from_grid(cls, grid: PhaseGrid, values: npt.ArrayLike, weights: WeightParams | None = None) -> Field:
        """Grid backing with bilinear interpolation, weighted when `weights` is given."""
        return cls(grid=grid, values=np.asarray(values, dtype=float), weights=weights)

    @classmethod
    def constant(cls, c: float) -> Field:
        value = float(c)

        def rule(x: FloatArray, v: FloatArray) -> FloatArray:
            return np.full(np.broadcast(x, v).shape, value)

        return cls.from_rule(rule)

    @classmethod
    def zero(cls) -> Field:
        return cls.constant(0.0)

    @property
    def is_grid(self) -> bool:
        return self._grid is not None

    @property
    def grid(self) -> PhaseGrid | None:
        return self._grid

    @property
    def values(self) -> FloatArray | None:
        return self._values

    @property
    def weights(self) -> WeightParams | None:
        return self._weights

    def __call__(self, x: npt.ArrayLike, v: npt.ArrayLike) -> FloatArray:
        """Evaluate at broadcastable (x, v)."""
        xa, va = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(v, dtype=float))
        if self._rule is not None:
            return np.broadcast_to(np.asarray(self._rule(xa, va), dtype=float), xa.shape)
        assert self._interp is not None
        out = np.asarray(self._interp(np.stack([xa.ravel(), va.ravel()], axis=-1))).reshape(xa.shape)
        if self._weights is not None:
            out = out * self._weights.gaussian(xa, va)
        return out

    def sample(self, grid: PhaseGrid) -> FloatArray:
        """Values at the nodes of `grid`, shape (nx, nv)."""
        if self._grid is not None and self._values is not None and self._grid.same_as(grid):
            return self._values.copy()
        X, V = grid.mesh()
        return np.array(self(X, V), dtype=float)

    def on_grid(self, grid: PhaseGrid, weights: WeightParams | None = None) -> Field:
        """Resample onto `grid`."""
        return Field.from_grid(grid, self.sample(grid), weights)

    # =========================================================================
    # Arithmetic
    # =========================================================================

    def _combine(self, other: Field, op: Callable[[FloatArray, FloatArray], FloatArray]) -> Field:
        if self._grid is None and other._grid is None:
            a, b = self, other
            return Field.from_rule(lambda x, v: op(a(x, v), b(x, v)))
        base = self if self._grid is not None else other
        assert base._grid is not None
        if self._grid is not None and other._grid is not None and not self._grid.same_as(other._grid):
            raise FieldError("cannot combine grid fields on different grids")
        return Field.from_grid(base._grid, op(self.sample(base._grid), other.sample(base._grid)), base._weights)

    def __add__(self, other: Field) -> Field:
        return self._combine(other, np.add)

    def __sub__(self, other: Field) -> Field:
        return self._combine(other, np.subtract)

    def __mul__(self, c: float) -> Field:
        scale = float(c)
        if self._grid is not None and self._values is not None:
            return Field.from_grid(self._grid, scale * self._values, self._weights)
        base = self
        return Field.from_rule(lambda x, v: scale * base(x, v))

    __rmul__ = __mul__

    def __neg__(self) -> Field:
        return self * -1.0

    def __repr__(self) -> str:
        if self._grid is not None:
            return f"Field(grid={self._grid.shape}, weighted={self._weights is not None})"
        return "Field(rule)"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-indexed fields, read as t -> T^{-t} f(t)."""

    times: FloatArray
    fields: tuple[Field, ...]

    def __post_init__(self) -> None:
        """Validate node count and ordering."""
        times = _readonly(self.times)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "fields", tuple(self.fields))
        if times.ndim != 1 or times.size < 1:
            raise ValueError("times must be a nonempty 1-D array")
        if times.size != len(self.fields):
            raise ValueError(f"got {times.size} times but {len(self.fields)} fields")
        if not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        if not np.any(times == 0.0):
            raise ValueError("times must contain 0")

    @classmethod
    def constant(cls, field: Field, times: npt.ArrayLike) -> Trajectory:
        t = np.asarray(times, dtype=float)
        return cls(t, tuple(field for _ in range(t.size)))

    @classmethod
    def from_values(
        cls,
        times: npt.ArrayLike,
        grid: PhaseGrid,
        values: FloatArray,
        weights: WeightParams | None = None,
    ) -> Trajectory:
        """Wrap an (nt, nx, nv) array of node values."""
        t = np.asarray(times, dtype=float)
        if values.shape != (t.size, *grid.shape):
            raise FieldError(f"values shape {values.shape} does not match {(t.size, *grid.shape)}")
        return cls(t, tuple(Field.from_grid(grid, values[k], weights) for k in range(t.size)))

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def zero_index(self) -> int:
        return int(np.flatnonzero(self.times == 0.0)[0])

    def values(self, grid: PhaseGrid) -> FloatArray:
        """Node values of every field on `grid`, shape (nt, nx, nv)."""
        return np.stack([f.sample(grid) for f in self.fields])


# =============================================================================
# Norms
# =============================================================================


def _default_grid(f: Field, w: WeightParams) -> PhaseGrid:
    if f.grid is not None:
        return f.grid
    return PhaseGrid.from_weights(w, constants.DEFAULT_NORM_NODES, constants.DEFAULT_NORM_NODES)


def weighted_sup(values: npt.ArrayLike, grid: PhaseGrid, w: WeightParams) -> FloatArray:
    """Weighted sup over the trailing (nx, nv) axes of node values.

    Raises:
        FieldError: non-finite values, or a weighted product that overflows
    """
    vals = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise FieldError("non-finite field")
    X, V = grid.mesh()
    weight = w.weight(X, V)
    with np.errstate(over="ignore", invalid="ignore"):
        prod = np.abs(vals) * weight
    prod = np.where(vals == 0.0, 0.0, prod)
    if not np.all(np.isfinite(prod)):
        raise FieldError("weight overflow")
    return np.asarray(prod.max(axis=(-2, -1)))


def weighted_norm(f: Field, w: WeightParams, grid: PhaseGrid | None = None) -> float:
    """sup |f| exp(alpha x^2 + beta v^2) over grid nodes.

    Grid-backed fields use their own nodes; rule-backed fields use `grid` or
    the default evaluation grid over the truncation box.
    """
    g = grid if grid is not None else _default_grid(f, w)
    return float(weighted_sup(f.sample(g), g, w))


def triple_norm(g: Trajectory, w: WeightParams, grid: PhaseGrid | None = None) -> float:
    """Max over time nodes of the weighted norm."""
    return max(weighted_norm(f, w, grid) for f in g.fields)


# =============================================================================
# Maxwellian and transport
# =============================================================================


def maxwellian(w: WeightParams) -> Field:
    """M(x, v) = exp(-alpha x^2 - beta v^2)."""
    return Field.from_rule(w.gaussian)


def transport(g: Field, s: float) -> Field:
    """Return (x, v) -> g(x - s v, v)."""
    shift = float(s)
    if shift == 0.0:
        return g
    if g.grid is None:
        return Field.from_rule(lambda x, v: g(x - shift * v, v))
    X, V = g.grid.mesh()
    return Field.from_grid(g.grid, g(X - shift * V, V), g.weights)


# =============================================================================
# Grid dumps
# =============================================================================


def field_frame(f: Field, grid: PhaseGrid) -> pd.DataFrame:
    """Row-major (x_i, v_j) frame with columns x, v, value."""
    X, V = grid.mesh()
    return pd.DataFrame(
        {"x": X.ravel(), "v": V.ravel(), "value": f.sample(grid).ravel()},
        columns=constants.FIELD_COLUMNS,
    )


def write_field_csv(f: Field, grid: PhaseGrid, path: str | Path) -> None:
    field_frame(f, grid).to_csv(path, index=False, float_format=constants.FLOAT_FORMAT)


def read_field_csv(path: str | Path, weights: WeightParams | None = None) -> Field:
    """Read an x,v,value dump back into a grid field.

    Raises:
        FieldError: an unreadable file, missing columns or a dump that is not a full tensor grid
    """
    try:
        df = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise FieldError(f"cannot read grid dump {path}: {e}") from e
    missing = [c for c in constants.FIELD_COLUMNS if c not in df.columns]
    if missing:
        raise FieldError(f"grid dump {path} is missing columns: {', '.join(missing)}")
    xs = np.unique(df["x"].to_numpy(dtype=float))
    vs = np.unique(df["v"].to_numpy(dtype=float))
    if len(df) != xs.size * vs.size:
        raise FieldError(f"grid dump {path} is not a full tensor grid")
    df = df.sort_values(["x", "v"]).reset_index(drop=True)
    values = df["value"].to_numpy(dtype=float).reshape(xs.size, vs.size)
    return Field.from_grid(PhaseGrid(xs, vs), values, weights)
