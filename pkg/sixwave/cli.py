"""Command-line entry point.

Subcommands: simulate, ks, scatter, thresholds, verify. Exit codes:
0 success, 1 usage or configuration errors (and failed verify checks),
2 regime errors, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Any, NoReturn, Sequence

import numpy as np
import pandas as pd

from sixwave import __version__, constants
from sixwave.bounds import thresholds
from sixwave.config import RunConfig, load_config, load_run_config
from sixwave.core import WeightParams, triple_norm, weighted_norm, write_field_csv
from sixwave.duhamel import Solution, duhamel_residual, picard_solve
from sixwave.exceptions import ConfigError, ConvergenceError, SixWaveError
from sixwave.kaniel_shinbrot import ks_solve
from sixwave.oracle import verify
from sixwave.scattering import Direction, forward_limit, roundtrip

logger = logging.getLogger(__name__)


class _ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises ConfigError instead of exiting on bad usage."""

    def error(self, message: str) -> NoReturn:
        raise ConfigError(f"{self.prog}: {message}")


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="sixwave", description="Six-wave kinetic equation solvers")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    def with_config(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", nargs="?", type=Path, help="key = value config file (default: discovery)")
        p.add_argument("--output-dir", type=Path, default=None, help="directory for CSV outputs")
        return p

    simulate = with_config("simulate", "Picard solve of the mild formulation")
    simulate.add_argument("--centered", action="store_true", help="solve in the ball around the Maxwellian")

    with_config("ks", "Kaniel-Shinbrot bracketing")

    scatter = with_config("scatter", "scattering state of the initial data")
    scatter.add_argument("--direction", choices=["+", "-", "plus", "minus"], default=None)
    scatter.add_argument("--roundtrip", action="store_true", help="also measure the inverse-then-forward defect")

    th = sub.add_parser("thresholds", help="print constants and regime radii as key,value rows")
    th.add_argument("config", nargs="?", type=Path)
    th.add_argument("--alpha", type=float, default=None)
    th.add_argument("--beta", type=float, default=None)

    ver = sub.add_parser("verify", help="run the oracle suites")
    ver.add_argument("--seed", type=int, default=None, help="default: seed from the discovered config, else 0")
    ver.add_argument("--full", action="store_true", help="acceptance sample sizes")
    ver.add_argument("--output-dir", type=Path, default=None, help="directory for verify.csv")
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


# =============================================================================
# Output helpers
# =============================================================================


def _to_csv(df: pd.DataFrame, path: Path) -> None:
    df.to_csv(path, index=False, float_format=constants.FLOAT_FORMAT)
    logger.info("wrote %s", path)


def _write_summary(rows: list[tuple[str, Any]], out: Path) -> None:
    frame = pd.DataFrame([(k, _format_value(v)) for k, v in rows], columns=constants.KEY_VALUE_COLUMNS)
    _to_csv(frame, out / constants.SUMMARY_FILE)


def _format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _output_dir(run: RunConfig, override: Path | None) -> Path:
    out = override if override is not None else run.output_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def _history_frame(solution: Solution) -> pd.DataFrame:
    residuals = solution.residual_history
    ratios = np.concatenate([[np.nan], solution.contraction_ratios])
    return pd.DataFrame(
        {"iter": np.arange(1, residuals.size + 1), "residual": residuals, "ratio": ratios[: residuals.size]},
        columns=constants.DIAGNOSTICS_COLUMNS,
    )


def _raise_if_not_converged(converged: bool, what: str) -> None:
    if not converged:
        raise ConvergenceError(f"{what} did not converge; outputs were written for inspection")


# =============================================================================
# Commands
# =============================================================================


def _simulate(args: argparse.Namespace) -> int:
    run = load_run_config(args.config)
    w = run.weights
    cfg = run.solver
    if args.centered:
        cfg = dataclasses.replace(cfg, center_on_maxwellian=True)
    out = _output_dir(run, args.output_dir)
    grid = cfg.grid
    f0 = run.init.build(w)

    solution = picard_solve(f0, w, cfg)
    _to_csv(_history_frame(solution), out / constants.DIAGNOSTICS_FILE)
    for k in range(len(solution.trajectory)):
        write_field_csv(solution.physical(k), grid, out / constants.FIELD_FILE_TEMPLATE.format(index=k))
    _write_summary(
        [
            ("command", "simulate"),
            ("init", str(run.init)),
            ("converged", solution.converged),
            ("iterations", solution.iterations),
            ("final_residual", float(solution.residual_history[-1])),
            ("triple_norm", triple_norm(solution.trajectory, w, grid)),
            ("duhamel_residual", duhamel_residual(solution, f0, w, cfg)),
            ("r_e", thresholds(w).r_e),
            ("ball_radius", solution.ball_radius),
            ("band_respected", solution.band_respected),
        ],
        out,
    )
    _raise_if_not_converged(solution.converged, "picard iteration")
    return 0


def _ks(args: argparse.Namespace) -> int:
    run = load_run_config(args.config)
    w = run.weights
    cfg = run.solver
    out = _output_dir(run, args.output_dir)
    grid = cfg.grid
    f0 = run.init.build(w)

    solution = ks_solve(f0, w, cfg)
    state = solution.brackets
    assert state is not None
    frame = pd.DataFrame(
        {
            "n": np.arange(1, state.n + 1),
            "gap": state.gap_history,
            "min_gap_node": np.array(state.min_gap_nodes, dtype=int),
        },
        columns=constants.SANDWICH_COLUMNS,
    )
    _to_csv(frame, out / constants.SANDWICH_FILE)
    last = len(solution.trajectory) - 1
    write_field_csv(solution.physical(last), grid, out / constants.KS_LIMIT_FILE)
    _write_summary(
        [
            ("command", "ks"),
            ("init", str(run.init)),
            ("converged", solution.converged),
            ("iterations", solution.iterations),
            ("final_gap", float(state.gap_history[-1])),
            ("sandwich_violation", state.sandwich_violation),
            ("min_value", float(np.min(solution.trajectory.values(grid)))),
            ("r_ks", thresholds(w).r_ks),
        ],
        out,
    )
    _raise_if_not_converged(solution.converged, "Kaniel-Shinbrot iteration")
    return 0


def _scatter(args: argparse.Namespace) -> int:
    run = load_run_config(args.config)
    w = run.weights
    cfg = run.solver
    direction = Direction.parse(args.direction) if args.direction is not None else run.direction
    out = _output_dir(run, args.output_dir)
    grid = cfg.grid
    f0 = run.init.build(w)

    result = forward_limit(f0, w, cfg, direction)
    frame = pd.DataFrame(result.convergence_history, columns=constants.SCATTERING_COLUMNS)
    _to_csv(frame, out / constants.SCATTERING_FILE)
    name = "f_plus.csv" if direction is Direction.PLUS else "f_minus.csv"
    write_field_csv(result.state, grid, out / name)
    rows: list[tuple[str, Any]] = [
        ("command", "scatter"),
        ("init", str(run.init)),
        ("direction", direction.value),
        ("converged", result.converged),
        ("tail_time", result.tail_time),
        ("tail_increment", result.tail_increment),
        ("tail_bound", result.tail_bound),
        ("tail_certified", result.tail_certified),
        ("state_norm", weighted_norm(result.state, w, grid)),
        ("r_s", thresholds(w).r_s),
    ]
    if args.roundtrip:
        rows.append(("roundtrip_defect", roundtrip(result.state, w, cfg, direction)))
    _write_summary(rows, out)
    _raise_if_not_converged(result.converged, "scattering limit")
    return 0


def _thresholds(args: argparse.Namespace) -> int:
    if args.alpha is not None or args.beta is not None:
        if args.alpha is None or args.beta is None:
            raise ConfigError("thresholds needs both --alpha and --beta")
        try:
            w = WeightParams(args.alpha, args.beta)
        except ValueError as e:
            raise ConfigError(str(e)) from e
    else:
        w = load_run_config(args.config).weights
    frame = pd.DataFrame(thresholds(w).as_rows(), columns=constants.KEY_VALUE_COLUMNS)
    frame.to_csv(sys.stdout, index=False)
    return 0


def _verify_settings(args: argparse.Namespace) -> tuple[int, Path]:
    """Seed and output directory: flags first, then the discovered config."""
    config = load_config()
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    out = args.output_dir if args.output_dir is not None else Path(str(config.get("output_dir", ".")))
    out.mkdir(parents=True, exist_ok=True)
    return seed, out


def _verify(args: argparse.Namespace) -> int:
    seed, out = _verify_settings(args)
    results = verify(seed=seed, full=args.full)
    frame = pd.DataFrame([r.as_row() for r in results], columns=constants.VERIFY_COLUMNS)
    _to_csv(frame, out / constants.VERIFY_FILE)
    failed = [r.check for r in results if not r.passed]
    if failed:
        logger.error("verify failed: %s", ", ".join(failed))
        return 1
    return 0


_COMMANDS = {
    "simulate": _simulate,
    "ks": _ks,
    "scatter": _scatter,
    "thresholds": _thresholds,
    "verify": _verify,
}


def run(args: Sequence[str] | None = None) -> int:
    """Parse `args`, run the subcommand and return its exit code."""
    try:
        ns = _build_parser().parse_args(args)
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    _configure_logging(ns.verbose)
    try:
        return _COMMANDS[ns.command](ns)
    except SixWaveError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


def main() -> None:
    """Console-script entry point."""
    sys.exit(run())
