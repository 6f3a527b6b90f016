"""Explicit constants, regime thresholds and the Gamma majorant.

Only the constants that gate a solver are exported: C_d, C_{1,beta} and the
radii r_e, r_p, r_ks, r_s. Inequalities are validated numerically, never
saturated.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.integrate import quad, trapezoid
from scipy.special import gamma as gamma_fn

from sixwave.collision import QuadratureSpec
from sixwave.core import FloatArray, PhaseGrid, WeightParams
from sixwave.exceptions import QuadratureError

logger = logging.getLogger(__name__)

# |T^{-s} C[g](s)| <= 12 |||g|||^5 Gamma(s, x, v): 4 + 2 + 4 + 2 from G1, G2, L1, L2
COLLISION_MAJORANT_FACTOR = 12.0

# Boundaries of the Maxwellian-centered regime
CENTERED_UPPER = (3.0 / 16.0) ** 4
CENTERED_LOWER = 2.0**-12
R_P_LOWER = 1.0 / 6.0


@dataclass(frozen=True)
class Thresholds:
    """Constants and radii derived from (alpha, beta).

    Attributes:
        c_d: C_1 = 2 pi
        c1beta: C_{1,beta} = 2^{-1/2} 2 pi (1/beta + 1)
        r_e: Small-data radius for global well-posedness
        r_p_interval: (lo, hi) admissible ball radii around M, or None when empty
        r_ks: Radius for the Kaniel-Shinbrot scheme
        r_s: Scattering radius (equal to r_e)
        nonneg_regime: 2^-12 < C_{1,beta} alpha^{-1/2} < (3/16)^4
        weight_ratio: C_{1,beta} alpha^{-1/2}
    """

    c_d: float
    c1beta: float
    r_e: float
    r_p_interval: tuple[float, float] | None
    r_ks: float
    r_s: float
    nonneg_regime: bool
    weight_ratio: float

    def as_rows(self) -> list[tuple[str, str]]:
        """key,value rows for CSV output; an empty interval prints blank bounds."""
        lo, hi = self.r_p_interval if self.r_p_interval is not None else (None, None)
        return [
            ("c_d", repr(self.c_d)),
            ("c1beta", repr(self.c1beta)),
            ("r_e", repr(self.r_e)),
            ("r_p_lo", "" if lo is None else repr(lo)),
            ("r_p_hi", "" if hi is None else repr(hi)),
            ("r_ks", repr(self.r_ks)),
            ("r_s", repr(self.r_s)),
            ("nonneg_regime", str(self.nonneg_regime).lower()),
            ("weight_ratio", repr(self.weight_ratio)),
        ]


def c_d(d: int) -> float:
    """max(pi^d, |S^{2d-1}|) with |S^{2d-1}| = 2 pi^d / Gamma(d)."""
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    return max(math.pi**d, 2.0 * math.pi**d / math.gamma(d))


def conv_constant(d: int, beta: float, q: float) -> float:
    """Constant of the Gaussian convolution estimate with exponent q > -2d."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if not q > -2 * d:
        raise ValueError(f"q must exceed -2d = {-2 * d}, got {q}")
    if q <= 0:
        return float(2.0 ** (q / 2.0) * c_d(d) * (beta ** (-d) + 1.0 / (2 * d + q)))
    return float(2.0 ** (3.0 * q - 2.0) * c_d(d) * beta ** (-q / 2.0 + d) * gamma_fn((q + d) / 2.0))


def c1beta(beta: float) -> float:
    """C_{1,beta}: the convolution constant at d = 1, q = -1."""
    return conv_constant(1, beta, -1.0)


def thresholds(w: WeightParams) -> Thresholds:
    c = c1beta(w.beta)
    a8 = w.alpha**0.125
    c4 = c**0.25
    r_e = a8 / (2.0**3.5 * c4)
    ratio = c / math.sqrt(w.alpha)
    interval: tuple[float, float] | None = None
    if ratio < CENTERED_UPPER:
        hi = a8 / (8.0 * c4) - 0.5
        if hi >= R_P_LOWER:
            interval = (R_P_LOWER, hi)
    return Thresholds(
        c_d=c_d(1),
        c1beta=c,
        r_e=r_e,
        r_p_interval=interval,
        r_ks=0.95 * a8 / (240.0 * c) ** 0.25,
        r_s=r_e,
        nonneg_regime=CENTERED_LOWER < ratio < CENTERED_UPPER,
        weight_ratio=ratio,
    )


def lambda_radius(w: WeightParams) -> float:
    """Largest rho for which the Lambda map sends the rho-ball into the rho/32-ball."""
    return w.alpha**0.125 / (2.0**2.5 * c1beta(w.beta) ** 0.25)


# =============================================================================
# Gamma
# =============================================================================


def _velocity_factor(s: FloatArray, x: FloatArray, v: FloatArray, w: WeightParams, q: QuadratureSpec) -> FloatArray:
    """Trapezoid of exp(-alpha (x + s (v - v1))^2 - beta v1^2) over the v1 nodes."""
    vn = q.velocity_nodes
    expo = -w.alpha * (x[..., None] + s[..., None] * (v[..., None] - vn)) ** 2 - w.beta * vn * vn
    return np.asarray(np.exp(expo) @ q.velocity_weights)


def gamma(
    s: npt.ArrayLike, x: npt.ArrayLike, v: npt.ArrayLike, w: WeightParams, q: QuadratureSpec
) -> FloatArray | float:
    """Gamma(s, x, v) by tensor trapezoid over (v1, v2).

    The double integral factorizes, so the tensor rule is the square of the
    one-dimensional rule.
    """
    sa, xa, va = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (s, x, v)))
    phi = _velocity_factor(sa, xa, va, w, q)
    out = w.gaussian(xa, va) * phi * phi
    return float(out) if out.ndim == 0 else out


def gamma_exact(s: npt.ArrayLike, x: npt.ArrayLike, v: npt.ArrayLike, w: WeightParams) -> FloatArray | float:
    """Closed-form Gamma(s, x, v) for d = 1."""
    sa, xa, va = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (s, x, v)))
    denom = w.alpha * sa * sa + w.beta
    y = xa + sa * va
    phi_sq = (math.pi / denom) * np.exp(-2.0 * w.alpha * w.beta * y * y / denom)
    out = w.gaussian(xa, va) * phi_sq
    return float(out) if out.ndim == 0 else np.asarray(out)


def gamma_time_integral(
    x: float,
    v: float,
    w: WeightParams,
    lower: float = -math.inf,
    upper: float = math.inf,
    *,
    weighted: bool = False,
) -> float:
    """Integral of the closed-form Gamma over s in [lower, upper] by adaptive quadrature.

    With `weighted` the result is multiplied by exp(alpha x^2 + beta v^2).
    """
    scale = float(w.weight(x, v)) if weighted else 1.0

    def integrand(s: float) -> float:
        return float(gamma_exact(s, x, v, w)) * scale

    pieces = [p for p in (lower, 0.0, upper) if lower <= p <= upper]
    total = 0.0
    for a, b in zip(pieces[:-1], pieces[1:]):
        if a < b:
            total += quad(integrand, a, b, limit=200)[0]
    return total


def gamma_majorant(t0: float, t1: float, w: WeightParams, q: QuadratureSpec, nodes: int = 65) -> float:
    """sup over the grid of the weighted integral of Gamma over [t0, t1]."""
    if t1 < t0:
        t0, t1 = t1, t0
    grid: PhaseGrid = q.phase_grid()
    X, V = grid.mesh()
    s = np.linspace(t0, t1, nodes)
    phi_sq = np.stack([_velocity_factor(np.full_like(X, sk), X, V, w, q) ** 2 for sk in s])
    return float(np.max(trapezoid(phi_sq, s, axis=0)))


# =============================================================================
# Time and convolution estimates
# =============================================================================


def verify_time_lemma(x0: float, u0: float, alpha: float) -> tuple[float, float]:
    """(numeric integral of exp(-alpha (x0 + s u0)^2) over R, sqrt(pi) alpha^{-1/2} / |u0|).

    Raises:
        QuadratureError: u0 == 0
    """
    if u0 == 0:
        raise QuadratureError("degenerate direction: u0 must be nonzero")
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    center = -x0 / u0

    def integrand(s: float) -> float:
        return math.exp(-alpha * (x0 + s * u0) ** 2)

    numeric = quad(integrand, -math.inf, center)[0] + quad(integrand, center, math.inf)[0]
    return numeric, math.sqrt(math.pi / alpha) / abs(u0)


def convolution_lhs(v: float, beta: float, q: float, n_radial: int = 200, n_angular: int = 64) -> float:
    """Integral of (|v1 - v| + |v2 - v|)^q exp(-beta (v1^2 + v2^2)) over R^2.

    Polar Gauss-Legendre quadrature centred at (v, v); the angle is split per
    quadrant so that |cos| + |sin| is smooth on each piece.
    """
    if not q > -2:
        raise ValueError(f"q must exceed -2, got {q}")
    radius = math.sqrt(2.0) * abs(v) + 8.0 / math.sqrt(beta)
    tr, wr = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * radius * (tr + 1.0)
    wr = 0.5 * radius * wr
    ta, wa = np.polynomial.legendre.leggauss(n_angular)
    quarter = 0.25 * np.pi * (ta + 1.0)
    phi = np.concatenate([quarter + k * 0.5 * np.pi for k in range(4)])
    wphi = np.tile(0.25 * np.pi * wa, 4)
    c, s = np.cos(phi)[:, None], np.sin(phi)[:, None]
    integrand = (
        r ** (1.0 + q)
        * (np.abs(c) + np.abs(s)) ** q
        * np.exp(-beta * ((v + r * c) ** 2 + (v + r * s) ** 2))
    )
    return float(wphi @ integrand @ wr)


def convolution_bound(v: float, beta: float, q: float, d: int = 1) -> float:
    """C_{d,beta} (1 + |v|^{q+}) with 0^0 = 1."""
    q_plus = max(q, 0.0)
    return conv_constant(d, beta, q) * (1.0 + abs(v) ** q_plus)
