"""Tests for sixwave.bounds: constants, thresholds, Gamma and the time and convolution estimates."""

import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from sixwave.bounds import (
    COLLISION_MAJORANT_FACTOR,
    c1beta,
    c_d,
    conv_constant,
    convolution_bound,
    convolution_lhs,
    gamma,
    gamma_exact,
    gamma_majorant,
    gamma_time_integral,
    lambda_radius,
    thresholds,
    verify_time_lemma,
)
from sixwave.collision import QuadratureSpec, split_field
from sixwave.core import Field, WeightParams, maxwellian, weighted_sup
from sixwave.exceptions import QuadratureError


class TestConstants:
    """C_d and the convolution constant."""

    def test_c_d(self):
        """B001: C_1 = 2 pi and C_2 = 2 pi^2."""
        assert c_d(1) == pytest.approx(2 * math.pi)
        assert c_d(2) == pytest.approx(2 * math.pi**2)

    def test_c1beta_unit_beta(self):
        """B002: C_{1,1} = 2^{-1/2} 2 pi 2."""
        assert c1beta(1.0) == pytest.approx(8.885766, rel=1e-6)

    def test_c1beta_decreases_in_beta(self):
        """B003: Wider velocity weights give a smaller constant."""
        assert c1beta(4.0) < c1beta(1.0) < c1beta(0.25)

    def test_positive_exponent_branch(self):
        """B004: q > 0 uses the Gamma-function form."""
        assert conv_constant(1, 1.0, 2.0) > 0

    @pytest.mark.parametrize(("d", "beta", "q"), [(1, 1.0, -2.0), (1, 0.0, -1.0), (2, 1.0, -5.0)])
    def test_rejects_invalid_arguments(self, d, beta, q):
        """B005: q <= -2d or beta <= 0 raises ValueError."""
        with pytest.raises(ValueError):
            conv_constant(d, beta, q)


class TestThresholds:
    """Regime radii derived from (alpha, beta)."""

    def test_unit_weights(self, unit_weights):
        """B006: alpha = beta = 1 gives r_e ~ 0.0512 and no centered interval."""
        th = thresholds(unit_weights)
        c = c1beta(1.0)

        assert th.c_d == pytest.approx(2 * math.pi)
        assert th.c1beta == pytest.approx(8.885766, rel=1e-6)
        assert th.r_e == pytest.approx(0.05119, rel=1e-3)
        assert th.r_ks == pytest.approx(0.95 / (240 * c) ** 0.25)
        assert th.r_ks == pytest.approx(0.1398, rel=1e-3)
        assert th.r_s == th.r_e
        assert th.r_p_interval is None
        assert th.nonneg_regime is False

    def test_narrow_spatial_weight(self, narrow_weights):
        """B007: alpha = 1e8 opens the centered interval and the nonnegative regime."""
        th = thresholds(narrow_weights)

        assert th.r_p_interval is not None
        lo, hi = th.r_p_interval
        assert lo == pytest.approx(1 / 6)
        assert hi == pytest.approx(0.2240, abs=1e-3)
        assert th.nonneg_regime is True
        assert th.weight_ratio == pytest.approx(c1beta(1.0) / 1e4)

    def test_r_e_scales_like_alpha_to_one_eighth(self):
        """B008: Multiplying alpha by 2^8 doubles r_e."""
        small = thresholds(WeightParams(1.0, 1.0)).r_e
        large = thresholds(WeightParams(256.0, 1.0)).r_e

        assert large == pytest.approx(2 * small)

    def test_lambda_radius_is_twice_r_e(self, unit_weights):
        """B009: The Lambda self-map radius is 2 r_e."""
        assert lambda_radius(unit_weights) == pytest.approx(2 * thresholds(unit_weights).r_e)

    def test_rows(self, unit_weights):
        """B010: as_rows prints blanks for an empty centered interval."""
        rows = dict(thresholds(unit_weights).as_rows())

        assert list(rows) == [
            "c_d",
            "c1beta",
            "r_e",
            "r_p_lo",
            "r_p_hi",
            "r_ks",
            "r_s",
            "nonneg_regime",
            "weight_ratio",
        ]
        assert rows["r_p_lo"] == ""
        assert rows["nonneg_regime"] == "false"
        assert float(rows["r_e"]) == thresholds(unit_weights).r_e


class TestGamma:
    """Gamma(s, x, v) and its time integrals."""

    @pytest.fixture
    def q(self, unit_weights):
        return QuadratureSpec.for_weights(unit_weights, nx=3, nv=33, n_theta=8)

    def test_origin(self, unit_weights, q):
        """B011: Gamma(0, 0, 0) = pi for alpha = beta = 1."""
        assert gamma(0.0, 0.0, 0.0, unit_weights, q) == pytest.approx(math.pi, rel=1e-6)
        assert gamma_exact(0.0, 0.0, 0.0, unit_weights) == pytest.approx(math.pi)

    @pytest.mark.parametrize(("s", "x", "v"), [(0.5, 0.2, -0.4), (1.5, -1.0, 0.3), (-2.0, 0.5, 1.0)])
    def test_quadrature_matches_closed_form(self, unit_weights, q, s, x, v):
        """B012: The trapezoid Gamma agrees with the closed form."""
        assert gamma(s, x, v, unit_weights, q) == pytest.approx(gamma_exact(s, x, v, unit_weights), rel=1e-6)

    def test_decreasing_in_time_at_zero_position(self, unit_weights):
        """B013: Gamma(s, 0, v) decreases in |s|."""
        s = np.linspace(0.0, 5.0, 51)
        values = np.asarray(gamma_exact(s, 0.0, 0.7, unit_weights))

        assert np.all(np.diff(values) <= 0)

    def test_time_integral_bound(self, unit_weights):
        """B014: The integral over R of Gamma(s, 0, 0) is pi^2 and at most 2 C_{1,beta} alpha^{-1/2}."""
        total = gamma_time_integral(0.0, 0.0, unit_weights)

        assert total == pytest.approx(math.pi**2, rel=1e-6)
        assert total <= 2 * c1beta(1.0)

    def test_tail_halves_when_horizon_doubles(self, unit_weights):
        """B015: The tail beyond S decays like 1 / S."""
        tail_50 = gamma_time_integral(0.0, 0.0, unit_weights, lower=50.0)
        tail_100 = gamma_time_integral(0.0, 0.0, unit_weights, lower=100.0)

        assert tail_50 / tail_100 == pytest.approx(2.0, rel=1e-2)

    def test_weighted_integral_removes_gaussian(self, unit_weights):
        """B016: weighted=True multiplies by exp(alpha x^2 + beta v^2)."""
        plain = gamma_time_integral(0.5, 0.5, unit_weights, 0.0, 1.0)
        weighted = gamma_time_integral(0.5, 0.5, unit_weights, 0.0, 1.0, weighted=True)

        assert weighted == pytest.approx(plain * math.exp(0.5), rel=1e-8)

    def test_majorant_window(self, unit_weights, q):
        """B017: The weighted sup over [0, 1] is attained at x = v = 0 and equals pi^2 / 4."""
        assert gamma_majorant(0.0, 1.0, unit_weights, q) == pytest.approx(math.pi**2 / 4, rel=1e-3)

    def test_majorant_shrinks_for_later_windows(self, unit_weights, q):
        """B018: Later windows of the same length carry less mass."""
        assert gamma_majorant(1.0, 2.0, unit_weights, q) < gamma_majorant(0.0, 1.0, unit_weights, q)

    def test_majorant_accepts_reversed_window(self, unit_weights, q):
        """B019: Negative-time windows mirror positive ones on a symmetric grid."""
        assert gamma_majorant(-1.0, 0.0, unit_weights, q) == pytest.approx(
            gamma_majorant(0.0, 1.0, unit_weights, q), rel=1e-12
        )

    def test_majorant_factor(self):
        """B020: The collision majorant collects 4 + 2 + 4 + 2 kernel bounds."""
        assert COLLISION_MAJORANT_FACTOR == 12.0


class TestTimeAndConvolutionEstimates:
    """Time lemma and Gaussian convolution estimate."""

    @pytest.mark.parametrize(("x0", "u0", "alpha"), [(0.3, 2.0, 4.0), (-5.0, 0.1, 1.0), (0.0, -3.0, 100.0)])
    def test_time_lemma_equality(self, x0, u0, alpha):
        """B021: The integral of exp(-alpha (x0 + s u0)^2) is sqrt(pi / alpha) / |u0|."""
        numeric, closed = verify_time_lemma(x0, u0, alpha)

        assert numeric == pytest.approx(closed, rel=1e-8)

    def test_time_lemma_degenerate_direction(self):
        """B022: u0 = 0 raises QuadratureError."""
        with pytest.raises(QuadratureError, match="degenerate"):
            verify_time_lemma(0.0, 0.0, 1.0)

    def test_convolution_at_origin(self):
        """B023: For q = -1 at v = 0 the integral is sqrt(pi)/2 * 4 sqrt(2) ln(1 + sqrt(2))."""
        expected = 0.5 * math.sqrt(math.pi) * 4 * math.sqrt(2) * math.log(1 + math.sqrt(2))

        assert convolution_lhs(0.0, 1.0, -1.0) == pytest.approx(expected, rel=1e-6)

    @pytest.mark.parametrize(
        ("v", "beta", "q"), [(0.0, 1.0, -1.0), (2.5, 1.0, -1.0), (0.5, 0.25, 0.0), (-1.0, 2.0, 0.5)]
    )
    def test_convolution_estimate(self, v, beta, q):
        """B024: The convolution integral stays below C_{1,beta,q} (1 + |v|^{q+})."""
        assert convolution_lhs(v, beta, q) <= convolution_bound(v, beta, q)

    @pytest.mark.parametrize("seed", [0, 1])
    def test_transported_gain_integral(self, unit_weights, seed):
        """B025: ||int T^{-s} G1 ds|| <= 4 C_{1,beta} alpha^{-1/2} |||k l m||| (fg + fh + gh) on random trajectories."""
        rng = np.random.default_rng(seed)
        q = QuadratureSpec.for_weights(unit_weights, nx=9, nv=17, n_theta=8)
        grid = q.phase_grid()
        m = maxwellian(unit_weights).sample(grid)
        times = np.linspace(-6.0, 6.0, 49)
        norms = rng.uniform(0.5, 1.0, size=6)

        def slot(norm):
            values = rng.uniform(0.0, 1.0, grid.shape) * m
            values *= norm / float(weighted_sup(values, grid, unit_weights))
            return Field.from_grid(grid, values, unit_weights)

        integrand = np.stack([split_field([slot(n) for n in norms], grid, q, s).g1 for s in times])
        integral = trapezoid(integrand, times, axis=0)

        nf, ng, nh, nk, nl, nm = norms
        constant = 4 * c1beta(unit_weights.beta) / math.sqrt(unit_weights.alpha)
        bound = constant * nk * nl * nm * (nf * ng + nf * nh + ng * nh)
        assert float(weighted_sup(integral, grid, unit_weights)) <= bound
