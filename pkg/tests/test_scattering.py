"""Tests for sixwave.scattering: forward limits, inverse wave maps and horizon diagnostics."""

import dataclasses
import warnings

import numpy as np
import pytest

from sixwave.bounds import thresholds
from sixwave.core import Field, maxwellian, weighted_norm
from sixwave.duhamel import SolverConfig
from sixwave.exceptions import RegimeError
from sixwave.scattering import (
    Direction,
    forward_limit,
    inverse_wave,
    inverse_wave_result,
    roundtrip,
    scattering_operator,
)


@pytest.fixture
def quarter_data(unit_weights):
    """(r_s / 4) M."""
    return 0.25 * thresholds(unit_weights).r_s * maxwellian(unit_weights)


class TestDirection:
    """Direction parsing."""

    @pytest.mark.parametrize(
        ("text", "expected"),
        [("+", Direction.PLUS), ("plus", Direction.PLUS), ("-", Direction.MINUS), (" MINUS ", Direction.MINUS)],
    )
    def test_parse(self, text, expected):
        """S001: Symbols and names parse case-insensitively."""
        assert Direction.parse(text) is expected

    def test_parse_rejects_unknown(self):
        """S002: Other strings raise ValueError."""
        with pytest.raises(ValueError, match="direction must be one of"):
            Direction.parse("up")

    def test_sign(self):
        """S003: PLUS is +1 and MINUS is -1."""
        assert Direction.PLUS.sign == 1.0
        assert Direction.MINUS.sign == -1.0


class TestForwardLimit:
    """f_+- = lim T^{-t} f(t)."""

    def test_converges_on_first_horizon(self, quarter_data, unit_weights, small_cfg):
        """S004: Small data settles within the configured horizon."""
        result = forward_limit(quarter_data, unit_weights, small_cfg)

        assert result.converged
        assert result.tail_time == pytest.approx(1.0)
        assert result.tail_increment < small_cfg.scatter_tol
        assert result.direction is Direction.PLUS

    def test_state_stays_close_to_data(self, quarter_data, unit_weights, small_cfg):
        """S005: ||f_+ - f0|| is at most ||f0|| / 32 and ||f_+|| <= 2 r_s."""
        th = thresholds(unit_weights)
        result = forward_limit(quarter_data, unit_weights, small_cfg)

        moved = weighted_norm(result.state - quarter_data, unit_weights, small_cfg.grid)
        assert moved <= 0.25 * th.r_s / 32 * small_cfg.slack
        assert weighted_norm(result.state, unit_weights, small_cfg.grid) <= 2 * th.r_s * small_cfg.slack

    def test_tail_certified(self, quarter_data, unit_weights, small_cfg):
        """S006: The measured tail increment respects the collision-majorant bound."""
        result = forward_limit(quarter_data, unit_weights, small_cfg)

        assert result.tail_bound > 0
        assert result.tail_certified

    def test_history_ordered_by_time(self, quarter_data, unit_weights, small_cfg):
        """S007: History rows run from t = 0 outwards and end at defect 0."""
        result = forward_limit(quarter_data, unit_weights, small_cfg)
        history = result.convergence_history

        assert history.shape == (small_cfg.time_grid.size, 2)
        assert np.all(np.diff(np.abs(history[:, 0])) > 0)
        assert history[0, 0] == 0.0
        assert history[-1, 1] == 0.0

    def test_minus_direction(self, quarter_data, unit_weights, small_cfg):
        """S008: MINUS runs the same horizons at negative times."""
        result = forward_limit(quarter_data, unit_weights, small_cfg, Direction.MINUS)

        assert result.converged
        assert result.direction is Direction.MINUS
        assert np.all(result.convergence_history[:, 0] <= 0)

    def test_zero_data(self, unit_weights, small_cfg):
        """S009: f0 = 0 scatters to 0 with a zero bound."""
        result = forward_limit(Field.zero(), unit_weights, small_cfg)

        assert result.converged
        assert result.tail_increment == 0.0
        assert result.tail_bound == 0.0
        assert result.tail_certified

    def test_rejects_large_data(self, unit_weights, small_cfg):
        """S010: Data above r_s raises RegimeError."""
        f0 = 2 * thresholds(unit_weights).r_s * maxwellian(unit_weights)

        with pytest.raises(RegimeError, match="outside scattering regime"):
            forward_limit(f0, unit_weights, small_cfg)

    def test_tail_not_reached_warns(self, quarter_data, unit_weights, small_cfg):
        """S011: An unreachable tolerance warns and reports converged=False."""
        cfg = dataclasses.replace(small_cfg, scatter_tol=1e-30, max_doublings=1)

        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter("always")
            result = forward_limit(quarter_data, unit_weights, cfg)

            messages = [str(x.message) for x in w if issubclass(x.category, UserWarning)]
            assert any("did not converge" in m for m in messages)
        assert not result.converged
        assert result.tail_time == pytest.approx(2.0)

    def test_horizon_spacing_ignores_inserted_zero(self, quarter_data, unit_weights):
        """S018: A grid starting just below 0 keeps its nominal step on the scattering horizons."""
        cfg = SolverConfig.for_weights(unit_weights, nx=9, nv=9, n_theta=8, t_min=-0.01, t_max=1.0, nt=5)
        assert cfg.time_grid.size == 6

        result = forward_limit(quarter_data, unit_weights, cfg)

        assert result.converged
        assert result.tail_time == pytest.approx(1.0)
        assert result.convergence_history.shape == (5, 2)


class TestInverseWave:
    """Initial data from a scattering state."""

    def test_needs_two_horizons(self, quarter_data, unit_weights, small_cfg):
        """S012: The first horizon has no previous state, so at least one doubling runs."""
        result = inverse_wave_result(quarter_data, unit_weights, small_cfg)

        assert result.converged
        assert result.tail_time >= 2.0
        assert result.tail_certified

    def test_inverse_wave_returns_state(self, quarter_data, unit_weights, small_cfg):
        """S013: inverse_wave is the state of inverse_wave_result."""
        state = inverse_wave(quarter_data, unit_weights, small_cfg)
        result = inverse_wave_result(quarter_data, unit_weights, small_cfg)

        np.testing.assert_array_equal(state.sample(small_cfg.grid), result.state.sample(small_cfg.grid))

    @pytest.mark.parametrize("direction", [Direction.PLUS, Direction.MINUS])
    def test_roundtrip(self, quarter_data, unit_weights, small_cfg, direction):
        """S014: forward_limit(inverse_wave(f)) returns f."""
        th = thresholds(unit_weights)

        defect = roundtrip(quarter_data, unit_weights, small_cfg, direction)

        assert defect <= max(10 * small_cfg.scatter_tol, 1e-3 * th.r_s)

    def test_roundtrip_rejects_data_above_half_radius(self, unit_weights, small_cfg):
        """S015: Round trips need ||f|| <= r_s / 2."""
        f = 0.75 * thresholds(unit_weights).r_s * maxwellian(unit_weights)

        with pytest.raises(RegimeError, match="outside scattering regime"):
            roundtrip(f, unit_weights, small_cfg)

    def test_contraction_ratios(self, quarter_data, unit_weights, small_cfg):
        """S019: Each inverse-map iteration shrinks the update by at most a quarter, up to slack."""
        result = inverse_wave_result(quarter_data, unit_weights, small_cfg)

        assert result.contraction_ratios.size > 0
        assert np.all(result.contraction_ratios <= 0.25 * small_cfg.slack)

    def test_lipschitz_in_state(self, unit_weights, small_cfg):
        """S020: ||f0(f_+) - f0(g_+)|| <= 2 ||f_+ - g_+||, up to slack."""
        r_s = thresholds(unit_weights).r_s
        f_plus = 0.2 * r_s * maxwellian(unit_weights)
        g_plus = 0.4 * r_s * maxwellian(unit_weights)

        f0 = inverse_wave(f_plus, unit_weights, small_cfg)
        g0 = inverse_wave(g_plus, unit_weights, small_cfg)

        gap = weighted_norm(f_plus - g_plus, unit_weights, small_cfg.grid)
        assert weighted_norm(f0 - g0, unit_weights, small_cfg.grid) <= 2 * small_cfg.slack * gap


class TestScatteringOperator:
    """f_- -> f_+."""

    def test_small_state_barely_moves(self, quarter_data, unit_weights, small_cfg):
        """S016: For small data f_+ stays within 1e-3 r_s of f_-."""
        f_plus = scattering_operator(quarter_data, unit_weights, small_cfg)

        assert weighted_norm(f_plus - quarter_data, unit_weights, small_cfg.grid) <= 1e-3 * thresholds(
            unit_weights
        ).r_s

    def test_distinct_states_stay_distinct(self, unit_weights, small_cfg):
        """S017: Different f_- give different f_+."""
        r_s = thresholds(unit_weights).r_s
        a = scattering_operator(0.2 * r_s * maxwellian(unit_weights), unit_weights, small_cfg)
        b = scattering_operator(0.3 * r_s * maxwellian(unit_weights), unit_weights, small_cfg)

        assert weighted_norm(a - b, unit_weights, small_cfg.grid) > 0.05 * r_s

    def test_separation(self, unit_weights, small_cfg):
        """S021: States delta apart in the weighted norm map at least delta / 2 apart."""
        r_s = thresholds(unit_weights).r_s
        f_minus = 0.1 * r_s * maxwellian(unit_weights)
        g_minus = 0.45 * r_s * maxwellian(unit_weights)
        delta = weighted_norm(f_minus - g_minus, unit_weights, small_cfg.grid)

        a = scattering_operator(f_minus, unit_weights, small_cfg)
        b = scattering_operator(g_minus, unit_weights, small_cfg)

        assert weighted_norm(a - b, unit_weights, small_cfg.grid) >= 0.5 * delta
