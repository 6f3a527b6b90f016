"""Six-wave collision operator by delta-collapsed angular quadrature.

The resonant manifold {Sigma = 0, Omega = 0} is parametrized by the free
velocities (v1, v2) and an angle theta. With omega = (cos theta, sin theta),

    A  = (omega_1 (v1 - v) + omega_2 (v2 - v)) / (1 + omega_1 omega_2)
    v3 = v1 - A omega_1,  v4 = v2 - A omega_2,  v5 = v + A (omega_1 + omega_2)

and each quadrature point carries the weight (sign(A) + 1) / (4 (1 + omega_1 omega_2))
times the trapezoid weights in v1, v2 and the midpoint weight in theta.

Slot convention for the six fields: f at v, g at v1, h at v2, k at v3,
l at v4, m at v5. With a time shift s every slot at velocity w is evaluated
at position x + s (v - w), which realizes T^{-s} C[T^s g](s) directly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
import numpy.typing as npt

from sixwave import constants
from sixwave.core import Field, FloatArray, PhaseGrid, WeightParams
from sixwave.exceptions import QuadratureError

logger = logging.getLogger(__name__)

MIN_THETA_NODES = 4

# Target number of (x, quadrature point) pairs evaluated per chunk
_CHUNK_ELEMENTS = 1 << 19


@dataclass(frozen=True)
class QuadratureSpec:
    """Phase grid and angular resolution of the collision quadrature.

    Attributes:
        lx: Spatial half-width of the output grid
        lv: Velocity half-width; v1, v2 run over the uniform nodes of [-lv, lv]
        nx: Spatial nodes of the output grid
        nv: Velocity nodes (output grid and v1, v2 quadrature)
        n_theta: Midpoint nodes on the circle
    """

    lx: float
    lv: float
    nx: int = constants.DEFAULT_NX
    nv: int = constants.DEFAULT_NV
    n_theta: int = constants.DEFAULT_N_THETA

    def __post_init__(self) -> None:
        """Validate sizes."""
        if self.n_theta < MIN_THETA_NODES:
            raise QuadratureError(
                f"insufficient quadrature: n_theta must be at least {MIN_THETA_NODES}, got {self.n_theta}"
            )
        if self.nx < 2 or self.nv < 2:
            raise ValueError(f"nx and nv must be at least 2, got nx={self.nx}, nv={self.nv}")
        if not (self.lx > 0 and self.lv > 0):
            raise ValueError(f"lx and lv must be positive, got lx={self.lx}, lv={self.lv}")

    @classmethod
    def for_weights(
        cls,
        w: WeightParams,
        nx: int = constants.DEFAULT_NX,
        nv: int = constants.DEFAULT_NV,
        n_theta: int = constants.DEFAULT_N_THETA,
    ) -> QuadratureSpec:
        """Quadrature over the truncation box of `w`."""
        return cls(lx=w.lx, lv=w.lv, nx=nx, nv=nv, n_theta=n_theta)

    def refined(self) -> QuadratureSpec:
        """Double the velocity and angular resolution (grid nodes are kept)."""
        return QuadratureSpec(self.lx, self.lv, self.nx, 2 * self.nv - 1, 2 * self.n_theta)

    def phase_grid(self) -> PhaseGrid:
        return PhaseGrid(np.linspace(-self.lx, self.lx, self.nx), np.linspace(-self.lv, self.lv, self.nv))

    @cached_property
    def velocity_nodes(self) -> FloatArray:
        return np.linspace(-self.lv, self.lv, self.nv)

    @cached_property
    def velocity_weights(self) -> FloatArray:
        """Composite trapezoid weights on the velocity nodes."""
        h = 2.0 * self.lv / (self.nv - 1)
        wts = np.full(self.nv, h)
        wts[0] = wts[-1] = 0.5 * h
        return wts

    @cached_property
    def theta_nodes(self) -> FloatArray:
        return (np.arange(self.n_theta) + 0.5) * (2.0 * np.pi / self.n_theta)

    @cached_property
    def _tensor(self) -> _TensorNodes:
        nodes = self.velocity_nodes
        wv = self.velocity_weights
        i, j, k = np.meshgrid(np.arange(self.nv), np.arange(self.nv), np.arange(self.n_theta), indexing="ij")
        i, j, k = i.ravel(), j.ravel(), k.ravel()
        c = np.cos(self.theta_nodes)[k]
        s = np.sin(self.theta_nodes)[k]
        denom = 1.0 + c * s
        base = wv[i] * wv[j] * (2.0 * np.pi / self.n_theta) / (4.0 * denom)
        return _TensorNodes(i, j, nodes[i], nodes[j], c, s, denom, base)


class _TensorNodes(NamedTuple):
    i: npt.NDArray[np.intp]
    j: npt.NDArray[np.intp]
    v1: FloatArray
    v2: FloatArray
    c: FloatArray
    s: FloatArray
    denom: FloatArray
    base: FloatArray


@dataclass(frozen=True)
class ResonantTuple:
    """One point of the resonant manifold."""

    v: float
    v1: float
    v2: float
    theta: float
    A: float
    v3: float
    v4: float
    v5: float

    @property
    def omega(self) -> tuple[float, float]:
        return (math.cos(self.theta), math.sin(self.theta))

    @property
    def momentum_defect(self) -> float:
        """Sigma = v + v1 + v2 - v3 - v4 - v5."""
        return self.v + self.v1 + self.v2 - self.v3 - self.v4 - self.v5

    @property
    def energy_defect(self) -> float:
        """Omega = v^2 + v1^2 + v2^2 - v3^2 - v4^2 - v5^2."""
        return self.v**2 + self.v1**2 + self.v2**2 - self.v3**2 - self.v4**2 - self.v5**2


@dataclass(frozen=True)
class CollisionTerms:
    """The four split contributions at one (x, v)."""

    g1: float
    g2: float
    l1: float
    l2: float

    @property
    def gain(self) -> float:
        return self.g1 + self.g2

    @property
    def loss(self) -> float:
        return self.l1 + self.l2

    @property
    def total(self) -> float:
        return self.gain - self.loss


class SplitArrays(NamedTuple):
    """Split contributions over a set of output points."""

    g1: FloatArray
    g2: FloatArray
    l1: FloatArray
    l2: FloatArray

    @property
    def gain(self) -> FloatArray:
        return self.g1 + self.g2

    @property
    def loss(self) -> FloatArray:
        return self.l1 + self.l2

    @property
    def total(self) -> FloatArray:
        return (self.g1 + self.g2) - (self.l1 + self.l2)


# =============================================================================
# Parametrization and kernel
# =============================================================================


def resonant_velocities(
    v: npt.ArrayLike, v1: npt.ArrayLike, v2: npt.ArrayLike, c: npt.ArrayLike, s: npt.ArrayLike
) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
    """Vectorized (A, v3, v4, v5) for omega = (c, s)."""
    va, v1a, v2a = (np.asarray(a, dtype=float) for a in (v, v1, v2))
    ca, sa = np.asarray(c, dtype=float), np.asarray(s, dtype=float)
    A = (ca * (v1a - va) + sa * (v2a - va)) / (1.0 + ca * sa)
    return A, v1a - A * ca, v2a - A * sa, va + A * (ca + sa)


def parametrize(v: float, v1: float, v2: float, theta: float) -> ResonantTuple:
    """Map (v, v1, v2, theta) to its point on the resonant manifold.

    A may be <= 0; callers apply the sign gate.
    """
    A, v3, v4, v5 = resonant_velocities(v, v1, v2, math.cos(theta), math.sin(theta))
    return ResonantTuple(float(v), float(v1), float(v2), float(theta), float(A), float(v3), float(v4), float(v5))


def _check_theta(n_theta: int) -> None:
    if n_theta < MIN_THETA_NODES:
        raise QuadratureError(f"insufficient quadrature: n_theta must be at least {MIN_THETA_NODES}, got {n_theta}")


def hopf_nodes(n_theta: int) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Points and weights on S^3 from Hopf coordinates.

    omega_1 = cos(eta) (cos xi1, sin xi1), omega_2 = sin(eta) (cos xi2, sin xi2),
    measure sin(eta) cos(eta) d eta d xi1 d xi2.
    """
    xi = (np.arange(n_theta) + 0.5) * (2.0 * np.pi / n_theta)
    t, wt = np.polynomial.legendre.leggauss(max(n_theta // 2, 2))
    eta = 0.25 * np.pi * (t + 1.0)
    w_eta = 0.25 * np.pi * wt * np.sin(eta) * np.cos(eta)
    E, X1, X2 = np.meshgrid(eta, xi, xi, indexing="ij")
    W = np.broadcast_to(w_eta[:, None, None], E.shape) * (2.0 * np.pi / n_theta) ** 2
    om1 = np.stack([np.cos(E) * np.cos(X1), np.cos(E) * np.sin(X1)], axis=-1).reshape(-1, 2)
    om2 = np.stack([np.sin(E) * np.cos(X2), np.sin(E) * np.sin(X2)], axis=-1).reshape(-1, 2)
    return om1, om2, W.ravel()


def kernel_I(
    v: float | Sequence[float],
    v1: float | Sequence[float],
    v2: float | Sequence[float],
    n_theta: int = constants.DEFAULT_N_THETA,
    d: int = 1,
) -> float:
    """Quadrature of the resonant-manifold integral with unit integrand.

    Integrates (omega.u)^(2d-2) / (1 + omega_1.omega_2)^(2d-1) * (sign(omega.u) + 1) / 4
    over S^(2d-1) with u = (v1 - v, v2 - v). For d = 1 the value is pi/sqrt(3)
    at every nondegenerate input.

    Raises:
        QuadratureError: n_theta < 4
        ValueError: d outside {1, 2}
    """
    _check_theta(n_theta)
    if d == 1:
        theta = (np.arange(n_theta) + 0.5) * (2.0 * np.pi / n_theta)
        c, s = np.cos(theta), np.sin(theta)
        dot = c * (float(v1) - float(v)) + s * (float(v2) - float(v))  # type: ignore[arg-type]
        vals = (np.sign(dot) + 1.0) / (4.0 * (1.0 + c * s))
        return float(vals.sum() * (2.0 * np.pi / n_theta))
    if d == 2:
        va, v1a, v2a = (np.asarray(a, dtype=float).reshape(2) for a in (v, v1, v2))
        om1, om2, W = hopf_nodes(n_theta)
        dot = om1 @ (v1a - va) + om2 @ (v2a - va)
        denom = 1.0 + np.einsum("ij,ij->i", om1, om2)
        vals = dot**2 / denom**3 * (np.sign(dot) + 1.0) / 4.0
        return float(np.sum(W * vals))
    raise ValueError(f"d must be 1 or 2, got {d}")


# =============================================================================
# Split engine
# =============================================================================


def _split_at_velocity(
    slots: Sequence[Field | None],
    xs: FloatArray,
    v: float,
    q: QuadratureSpec,
    shift: float,
) -> SplitArrays:
    """Split contributions at output points (xs, v); a None f slot means f = 1."""
    f, g, h, k, l, m = slots
    nodes = q._tensor
    A = (nodes.c * (nodes.v1 - v) + nodes.s * (nodes.v2 - v)) / nodes.denom
    weight = nodes.base * (np.sign(A) + 1.0)
    keep = weight > 0.0
    A, weight = A[keep], weight[keep]
    c, s = nodes.c[keep], nodes.s[keep]
    i_idx, j_idx = nodes.i[keep], nodes.j[keep]
    v3 = nodes.v1[keep] - A * c
    v4 = nodes.v2[keep] - A * s
    v5 = v + A * (c + s)

    xcol = xs[:, None]
    vn = q.velocity_nodes
    # g and h sit on velocity nodes, so they only depend on (x, node index)
    G = g(xcol + shift * (v - vn), vn) if g is not None else None
    H = h(xcol + shift * (v - vn), vn) if h is not None else None
    F = f(xs, v)[:, None] if f is not None else np.ones((xs.size, 1))
    assert G is not None and H is not None and k is not None and l is not None and m is not None

    out = np.zeros((4, xs.size))
    step = max(1, _CHUNK_ELEMENTS // max(xs.size, 1))
    for start in range(0, A.size, step):
        sl = slice(start, start + step)
        K = k(xcol + shift * (v - v3[sl]), v3[sl])
        L = l(xcol + shift * (v - v4[sl]), v4[sl])
        Mv = m(xcol + shift * (v - v5[sl]), v5[sl])
        G1 = G[:, i_idx[sl]]
        H2 = H[:, j_idx[sl]]
        wt = weight[sl]
        out[0] += np.sum(K * L * Mv * F * (G1 + H2) * wt, axis=1)
        out[1] += np.sum(K * L * Mv * G1 * H2 * wt, axis=1)
        out[2] += np.sum(F * G1 * H2 * K * (L + Mv) * wt, axis=1)
        out[3] += np.sum(F * G1 * H2 * L * Mv * wt, axis=1)
    return SplitArrays(out[0], out[1], out[2], out[3])


def split_field(
    slots: Sequence[Field | None],
    grid: PhaseGrid,
    q: QuadratureSpec,
    shift: float = 0.0,
) -> SplitArrays:
    """Split contributions at every node of `grid`, arrays of shape (nx, nv).

    With `shift` = s this is the transported integrand T^{-s} C[T^s g](s).
    """
    if len(slots) != 6:
        raise ValueError(f"expected 6 slot fields, got {len(slots)}")
    parts = [_split_at_velocity(slots, grid.x, float(v), q, shift) for v in grid.v]
    return SplitArrays(*(np.stack([getattr(p, name) for p in parts], axis=1) for name in SplitArrays._fields))


def collision_field(f: Field, grid: PhaseGrid, q: QuadratureSpec, shift: float = 0.0) -> FloatArray:
    """C[f] at every node of `grid` (all six slots equal to f)."""
    return split_field((f,) * 6, grid, q, shift).total


def gain_field(f: Field, grid: PhaseGrid, q: QuadratureSpec, shift: float = 0.0) -> FloatArray:
    return split_field((f,) * 6, grid, q, shift).gain


def loss_rate_field(g: Field, grid: PhaseGrid, q: QuadratureSpec, shift: float = 0.0) -> FloatArray:
    """R[g, g, g, g, g] at every node of `grid`."""
    return split_field((None, g, g, g, g, g), grid, q, shift).loss


def collision_terms(
    f: Field,
    g: Field,
    h: Field,
    k: Field,
    l: Field,  # noqa: E741
    m: Field,
    x: float,
    v: float,
    q: QuadratureSpec,
) -> CollisionTerms:
    """The four split contributions G1, G2, L1, L2 at (x, v)."""
    parts = _split_at_velocity((f, g, h, k, l, m), np.array([float(x)]), float(v), q, 0.0)
    return CollisionTerms(float(parts.g1[0]), float(parts.g2[0]), float(parts.l1[0]), float(parts.l2[0]))


def collide(f: Field, x: float, v: float, q: QuadratureSpec) -> float:
    """C[f](x, v) = gain - loss."""
    return collision_terms(f, f, f, f, f, f, x, v, q).total


def loss_rate_R(
    g: Field,
    h: Field,
    k: Field,
    l: Field,  # noqa: E741
    m: Field,
    x: float,
    v: float,
    q: QuadratureSpec,
) -> float:
    """The loss integral with the leading f removed, so that L = f R."""
    parts = _split_at_velocity((None, g, h, k, l, m), np.array([float(x)]), float(v), q, 0.0)
    return float(parts.l1[0] + parts.l2[0])


def moments(f: Field, x: float, q: QuadratureSpec) -> tuple[float, float, float]:
    """Trapezoid moments of C[f](x, .) against 1, v and v^2 on the velocity nodes."""
    vn = q.velocity_nodes
    vals = np.array([collide(f, x, float(v), q) for v in vn])
    wts = q.velocity_weights * vals
    return (float(np.sum(wts)), float(np.sum(wts * vn)), float(np.sum(wts * vn * vn)))


# =============================================================================
# Multilinear decompositions
# =============================================================================

# Factor structure of each split over the slots (f, g, h, k, l, m) = (0..5);
# a tuple with two entries is a factor that enters as a sum.
SPLIT_FACTORS: dict[str, tuple[tuple[int, ...], ...]] = {
    "g1": ((3,), (4,), (5,), (0,), (1, 2)),
    "g2": ((3,), (4,), (5,), (1,), (2,)),
    "l1": ((0,), (1,), (2,), (3,), (4, 5)),
    "l2": ((0,), (1,), (2,), (4,), (5,)),
}


def split_difference(
    part: str,
    a: Sequence[Field],
    b: Sequence[Field],
    x: float,
    v: float,
    q: QuadratureSpec,
) -> list[float]:
    """Telescoping terms of split[a] - split[b], one per factor.

    Term p takes the b-slots for factors before p, a - b for factor p and
    the a-slots after it. The terms sum to split[a] - split[b].
    """
    if part not in SPLIT_FACTORS:
        raise ValueError(f"part must be one of {sorted(SPLIT_FACTORS)}, got {part!r}")
    factors = SPLIT_FACTORS[part]
    terms = []
    for p in range(len(factors)):
        slots = list(a)
        for i, factor in enumerate(factors):
            for idx in factor:
                if i < p:
                    slots[idx] = b[idx]
                elif i == p:
                    slots[idx] = a[idx] - b[idx]
        terms.append(getattr(collision_terms(*slots, x, v, q), part))
    return terms
