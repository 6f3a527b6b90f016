"""Run configuration: `key = value` files, layered discovery and initial data.

Values are parsed as TOML literals so that numbers, booleans and quoted
strings keep their types; anything TOML rejects (``zero``,
``maxwellian_scaled:0.02``, ``0, 4, 33``) is kept as plain text.
"""

from __future__ import annotations

import logging
import os
import tomllib
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from sixwave import constants
from sixwave.core import Field, WeightParams, maxwellian, read_field_csv
from sixwave.duhamel import SolverConfig
from sixwave.exceptions import ConfigError, SixWaveError
from sixwave.oracle import rayleigh_jeans
from sixwave.scattering import Direction

logger = logging.getLogger(__name__)

CONFIG_FILE_NAME = "sixwave.conf"
USER_CONFIG_PATH = Path.home() / ".sixwave" / CONFIG_FILE_NAME

REQUIRED_KEYS = ("alpha", "beta")
KNOWN_KEYS = frozenset(
    {
        "alpha",
        "beta",
        "eps_tail",
        "nx",
        "nv",
        "n_theta",
        "Lx",
        "Lv",
        "time_grid",
        "t_min",
        "t_max",
        "nt",
        "picard_tol",
        "max_iters",
        "scatter_tol",
        "enforce_thresholds",
        "center_on_maxwellian",
        "slack",
        "seed",
        "init",
        "max_workers",
        "max_doublings",
        "direction",
        "output_dir",
    }
)


# =============================================================================
# Initial data
# =============================================================================


@dataclass(frozen=True)
class InitSpec:
    """Initial data: zero, maxwellian_scaled:eps, rj:a,b or file:path."""

    kind: str
    params: tuple[float, ...] = ()
    path: Path | None = None

    @classmethod
    def parse(cls, text: str) -> InitSpec:
        """Parse an init string.

        Raises:
            ValueError: unknown kind or malformed parameters
        """
        raw = str(text).strip()
        kind, _, rest = raw.partition(":")
        kind = kind.strip()
        if kind == "zero" and not rest:
            return cls("zero")
        if kind == "maxwellian_scaled":
            return cls(kind, (float(rest),))
        if kind == "rj":
            parts = [p for p in rest.split(",") if p.strip()]
            if len(parts) != 2:
                raise ValueError(f"rj init needs two parameters a,b, got {rest!r}")
            a, b = (float(p) for p in parts)
            if not a > 0 or b < 0:
                raise ValueError(f"rj init needs a > 0 and b >= 0, got a={a}, b={b}")
            return cls(kind, (a, b))
        if kind == "file" and rest.strip():
            return cls(kind, path=Path(rest.strip()))
        raise ValueError(f"init must be one of zero | maxwellian_scaled:eps | rj:a,b | file:path, got {raw!r}")

    def build(self, w: WeightParams) -> Field:
        """Materialize the initial field."""
        if self.kind == "zero":
            return Field.zero()
        if self.kind == "maxwellian_scaled":
            return self.params[0] * maxwellian(w)
        if self.kind == "rj":
            return rayleigh_jeans(*self.params)
        assert self.path is not None
        return read_field_csv(self.path, w)

    def __str__(self) -> str:
        if self.kind == "zero":
            return "zero"
        if self.kind == "file":
            return f"file:{self.path}"
        return f"{self.kind}:{','.join(repr(p) for p in self.params)}"


DEFAULT_INIT = "zero"


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI run needs."""

    weights: WeightParams
    solver: SolverConfig
    init: InitSpec
    seed: int = 0
    direction: Direction = Direction.PLUS
    output_dir: Path = field(default_factory=lambda: Path("."))


# =============================================================================
# Reading
# =============================================================================


def _parse_value(raw: str) -> Any:
    try:
        return tomllib.loads(f"value = {raw}")["value"]
    except tomllib.TOMLDecodeError:
        return raw.split("#", 1)[0].strip()


def parse_text(text: str, source: str = "<string>") -> dict[str, Any]:
    """Parse `key = value` lines into a dict.

    Raises:
        ConfigError: a line without '=' or with an empty key
    """
    values: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, raw = stripped.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {stripped!r}")
        values[key] = _parse_value(raw.strip())
    return values


def read_config(config_path: str | Path, *, explicit: bool = False) -> dict[str, Any]:
    """Read one config file.

    Args:
        config_path: Path to a key = value file
        explicit: If True, raise on any error (fail-fast for explicit paths)

    Returns:
        dict: Parsed values, or empty dict for a missing or unreadable implicit file
    """
    path = Path(config_path)
    try:
        if not path.is_file():
            if explicit:
                raise ConfigError(f"Config file not found: {path}")
            return {}
        return parse_text(path.read_text(encoding="utf-8"), str(path))
    except (OSError, UnicodeDecodeError, ConfigError) as e:
        if explicit:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"Failed to read config file '{path}': {e}") from e
        warnings.warn(
            f"Failed to read config file '{path}': {e}. Ignoring this file.",
            UserWarning,
            stacklevel=3,
        )
        return {}


def load_config(config_path: str | Path | None = None) -> dict[str, Any]:
    """Merge config sources; later wins.

    With an explicit `config_path` only that file is read. Otherwise:
    user file -> ./sixwave.conf -> $SIXWAVE_CONFIG_FILE (explicit).
    SIXWAVE_OUTPUT_DIR overrides output_dir in both cases.
    """
    config: dict[str, Any] = {}
    if config_path is not None:
        config = read_config(config_path, explicit=True)
    else:
        # 1. User default config (implicit)
        config = {**config, **read_config(USER_CONFIG_PATH, explicit=False)}

        # 2. Current dir config (implicit)
        config = {**config, **read_config(CONFIG_FILE_NAME, explicit=False)}

        # 3. Env specified config (explicit - fail-fast on error)
        if constants.ENV_CONFIG_FILE in os.environ:
            config = {**config, **read_config(os.environ[constants.ENV_CONFIG_FILE], explicit=True)}

    if os.environ.get(constants.ENV_OUTPUT_DIR):
        config["output_dir"] = os.environ[constants.ENV_OUTPUT_DIR]
    return config


# =============================================================================
# Validation
# =============================================================================


def _number(values: dict[str, Any], key: str, default: float | None = None) -> float | None:
    value = values.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {value!r}") from None


def _real(values: dict[str, Any], key: str, default: float) -> float:
    value = _number(values, key, default)
    assert value is not None
    return value


def _integer(values: dict[str, Any], key: str, default: int) -> int:
    value = values.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return value


def _flag(values: dict[str, Any], key: str, default: bool) -> bool:
    value = values.get(key, default)
    if not isinstance(value, bool):
        raise ConfigError(f"{key} must be true or false, got {value!r}")
    return value


def _time_grid(values: dict[str, Any]) -> tuple[float, float, int]:
    t_min = _real(values, "t_min", constants.DEFAULT_T_MIN)
    t_max = _real(values, "t_max", constants.DEFAULT_T_MAX)
    nt = _integer(values, "nt", constants.DEFAULT_NT)
    if "time_grid" in values:
        raw = values["time_grid"]
        parts = raw if isinstance(raw, list) else str(raw).split(",")
        if len(parts) != 3:
            raise ConfigError(f"time_grid must be 't_min, t_max, nt', got {raw!r}")
        try:
            t_min, t_max = float(parts[0]), float(parts[1])
            nt_value = float(parts[2])
        except (TypeError, ValueError):
            raise ConfigError(f"time_grid must be 't_min, t_max, nt', got {raw!r}") from None
        if not nt_value.is_integer():
            raise ConfigError(f"time_grid nt must be an integer, got {parts[2]!r}")
        nt = int(nt_value)
    return t_min, t_max, nt


def build_run_config(values: dict[str, Any]) -> RunConfig:
    """Validate merged config values.

    Raises:
        ConfigError: unknown keys, missing required keys or invalid values
    """
    unknown = sorted(set(values) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    missing = [k for k in REQUIRED_KEYS if k not in values]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")

    try:
        alpha = _number(values, "alpha")
        beta = _number(values, "beta")
        assert alpha is not None and beta is not None
        w = WeightParams(
            alpha=alpha,
            beta=beta,
            eps_tail=_real(values, "eps_tail", constants.DEFAULT_EPS_TAIL),
            Lx=_number(values, "Lx"),
            Lv=_number(values, "Lv"),
        )
        t_min, t_max, nt = _time_grid(values)
        solver = SolverConfig.for_weights(
            w,
            nx=_integer(values, "nx", constants.DEFAULT_NX),
            nv=_integer(values, "nv", constants.DEFAULT_NV),
            n_theta=_integer(values, "n_theta", constants.DEFAULT_N_THETA),
            t_min=t_min,
            t_max=t_max,
            nt=nt,
            picard_tol=_number(values, "picard_tol"),
            scatter_tol=_number(values, "scatter_tol"),
            max_iters=_integer(values, "max_iters", constants.DEFAULT_MAX_ITERS),
            center_on_maxwellian=_flag(values, "center_on_maxwellian", False),
            enforce_thresholds=_flag(values, "enforce_thresholds", True),
            slack=_real(values, "slack", constants.DEFAULT_SLACK),
            max_workers=_integer(values, "max_workers", 1),
            max_doublings=_integer(values, "max_doublings", constants.DEFAULT_MAX_DOUBLINGS),
        )
        init = InitSpec.parse(str(values.get("init", DEFAULT_INIT)))
        direction = Direction.parse(str(values.get("direction", Direction.PLUS.value)))
    except ConfigError:
        raise
    except (ValueError, SixWaveError) as e:
        raise ConfigError(str(e)) from e

    return RunConfig(
        weights=w,
        solver=solver,
        init=init,
        seed=_integer(values, "seed", 0),
        direction=direction,
        output_dir=Path(str(values.get("output_dir", "."))),
    )


def parse_config(path: str | Path) -> tuple[WeightParams, SolverConfig, InitSpec]:
    """Read and validate one config file.

    Raises:
        ConfigError: unreadable file, unknown or missing keys, invalid values
    """
    run = build_run_config(load_config(path))
    return run.weights, run.solver, run.init


def load_run_config(path: str | Path | None = None) -> RunConfig:
    """Discover, merge and validate the configuration of one run."""
    run = build_run_config(load_config(path))
    logger.debug("run config: alpha=%g beta=%g init=%s", run.weights.alpha, run.weights.beta, run.init)
    return run
