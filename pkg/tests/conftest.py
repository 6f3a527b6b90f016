"""Pytest configuration for all tests."""

import pytest

from sixwave.core import WeightParams
from sixwave.duhamel import SolverConfig


def pytest_addoption(parser: pytest.Parser) -> None:
    """Add custom command line options."""
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="Run slow tests (refinement studies and acceptance-size runs)",
    )


def pytest_configure(config: pytest.Config) -> None:
    """Modify pytest configuration based on options."""
    if config.getoption("--run-slow"):
        # Override the default marker expression to include slow tests
        # This removes 'not slow' from the filter while keeping other filters
        current = config.option.markexpr
        if current:
            # Remove 'not slow' and 'and not slow' from expression
            new_expr = current.replace(" and not slow", "").replace("not slow", "")
            # Clean up any leading/trailing 'and'
            new_expr = new_expr.strip()
            if new_expr.startswith("and "):
                new_expr = new_expr[4:]
            if new_expr.endswith(" and"):
                new_expr = new_expr[:-4]
            # Handle empty expression
            if not new_expr or new_expr == "and":
                new_expr = ""
            config.option.markexpr = new_expr


@pytest.fixture
def unit_weights() -> WeightParams:
    """alpha = beta = 1 with the default tail tolerance."""
    return WeightParams(alpha=1.0, beta=1.0)


@pytest.fixture
def small_cfg(unit_weights: WeightParams) -> SolverConfig:
    """Coarse grid on [0, 1] that keeps solver tests fast."""
    return SolverConfig.for_weights(unit_weights, nx=9, nv=9, n_theta=8, t_min=0.0, t_max=1.0, nt=5)


@pytest.fixture
def symmetric_cfg(unit_weights: WeightParams) -> SolverConfig:
    """Coarse grid on [-1, 1]."""
    return SolverConfig.for_weights(unit_weights, nx=9, nv=9, n_theta=8, t_min=-1.0, t_max=1.0, nt=5)


@pytest.fixture
def narrow_weights() -> WeightParams:
    """alpha = 1e8, beta = 1: the Maxwellian-centered nonnegative regime."""
    return WeightParams(alpha=1e8, beta=1.0)
