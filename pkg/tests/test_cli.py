"""Tests for the sixwave command-line interface."""

import os
from unittest.mock import patch

import pandas as pd
import pytest

from sixwave import __version__, constants
from sixwave.cli import run
from sixwave.oracle import CheckResult

BASE_CONFIG = """\
alpha = 1
beta = 1
nx = 9
nv = 9
n_theta = 8
time_grid = 0, 1, 5
"""


@pytest.fixture(autouse=True)
def clean_env(tmp_path, monkeypatch):
    """Run every command from an empty directory without SIXWAVE_* variables."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setattr("sixwave.config.USER_CONFIG_PATH", tmp_path / "home" / "sixwave.conf")
    with patch.dict(os.environ, {}, clear=True):
        yield


def write_config(tmp_path, init="maxwellian_scaled:0.01", extra=""):
    path = tmp_path / "run.conf"
    path.write_text(f"{BASE_CONFIG}init = {init}\n{extra}")
    return path


def read_summary(out):
    frame = pd.read_csv(out / constants.SUMMARY_FILE, dtype=str, keep_default_na=False)
    return dict(zip(frame["key"], frame["value"]))


class TestThresholdsCommand:
    """sixwave thresholds."""

    def test_alpha_beta_flags(self, capsys):
        """L001: --alpha/--beta print key,value rows including c1beta."""
        assert run(["thresholds", "--alpha", "1", "--beta", "1"]) == 0

        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "key,value"
        rows = dict(line.split(",", 1) for line in lines[1:])
        assert float(rows["c1beta"]) == pytest.approx(8.885766, rel=1e-6)
        assert float(rows["r_e"]) == pytest.approx(0.051194, rel=1e-4)
        assert rows["r_p_lo"] == ""
        assert rows["nonneg_regime"] == "false"

    def test_missing_beta(self, capsys):
        """L002: --alpha without --beta is a usage error."""
        assert run(["thresholds", "--alpha", "1"]) == 1
        assert "needs both --alpha and --beta" in capsys.readouterr().err

    def test_from_config(self, tmp_path, capsys):
        """L003: Without flags the weights come from the config file."""
        path = tmp_path / "narrow.conf"
        path.write_text("alpha = 1e8\nbeta = 1\n")

        assert run(["thresholds", str(path)]) == 0

        rows = dict(line.split(",", 1) for line in capsys.readouterr().out.splitlines()[1:])
        assert rows["nonneg_regime"] == "true"
        assert float(rows["r_p_lo"]) == pytest.approx(1 / 6)

    def test_invalid_weight(self, capsys):
        """L004: A nonpositive rate is a usage error."""
        assert run(["thresholds", "--alpha", "-1", "--beta", "1"]) == 1
        assert "alpha must be positive" in capsys.readouterr().err


class TestSimulateCommand:
    """sixwave simulate."""

    def test_writes_outputs(self, tmp_path):
        """L005: A small run writes diagnostics, one field per time node and a summary."""
        out = tmp_path / "out"

        assert run(["simulate", str(write_config(tmp_path)), "--output-dir", str(out)]) == 0

        diagnostics = pd.read_csv(out / constants.DIAGNOSTICS_FILE)
        assert list(diagnostics.columns) == constants.DIAGNOSTICS_COLUMNS
        assert diagnostics["iter"].tolist() == list(range(1, len(diagnostics) + 1))
        for k in range(5):
            field = pd.read_csv(out / constants.FIELD_FILE_TEMPLATE.format(index=k))
            assert list(field.columns) == constants.FIELD_COLUMNS
            assert len(field) == 81
        summary = read_summary(out)
        assert summary["command"] == "simulate"
        assert summary["converged"] == "true"
        assert summary["init"] == "maxwellian_scaled:0.01"

    def test_output_dir_from_config(self, tmp_path):
        """L006: output_dir in the config is used when --output-dir is absent."""
        path = write_config(tmp_path, extra="output_dir = from_config\n")

        assert run(["simulate", str(path)]) == 0
        assert (tmp_path / "from_config" / constants.SUMMARY_FILE).is_file()

    def test_large_data_is_regime_error(self, tmp_path, capsys):
        """L007: Data above r_e exits with code 2."""
        assert run(["simulate", str(write_config(tmp_path, init="maxwellian_scaled:1.0"))]) == 2
        assert "outside" in capsys.readouterr().err

    def test_non_convergence_exit_code(self, tmp_path):
        """L008: Running out of iterations exits with code 3 after writing outputs."""
        path = write_config(tmp_path, init="maxwellian_scaled:0.04", extra="max_iters = 1\n")
        out = tmp_path / "out"

        with pytest.warns(UserWarning, match="did not converge"):
            code = run(["simulate", str(path), "--output-dir", str(out)])

        assert code == 3
        assert read_summary(out)["converged"] == "false"

    def test_unknown_key(self, tmp_path, capsys):
        """L009: Unknown config keys exit with code 1."""
        path = write_config(tmp_path, extra="colour = red\n")

        assert run(["simulate", str(path)]) == 1
        assert "unknown config key" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        """L010: An explicit config path that does not exist exits with code 1."""
        assert run(["simulate", str(tmp_path / "absent.conf")]) == 1

    def test_discovers_cwd_config(self, tmp_path):
        """L011: Without a path the config in the working directory is used."""
        (tmp_path / "sixwave.conf").write_text(BASE_CONFIG + "init = zero\n")

        assert run(["simulate"]) == 0
        assert read_summary(tmp_path)["init"] == "zero"


    def test_missing_init_file(self, tmp_path, capsys):
        """L022: An init file that does not exist exits with code 1 and names the file."""
        path = write_config(tmp_path, init=f"file:{tmp_path / 'nope.csv'}")

        assert run(["simulate", str(path)]) == 1
        err = capsys.readouterr().err
        assert "cannot read grid dump" in err
        assert "nope.csv" in err


class TestKsCommand:
    """sixwave ks."""

    def test_writes_outputs(self, tmp_path):
        """L012: A small run writes the bracket history and the limit field."""
        out = tmp_path / "out"

        assert run(["ks", str(write_config(tmp_path)), "--output-dir", str(out)]) == 0

        sandwich = pd.read_csv(out / constants.SANDWICH_FILE)
        assert list(sandwich.columns) == constants.SANDWICH_COLUMNS
        assert (sandwich["min_gap_node"] > 0).all()
        limit = pd.read_csv(out / constants.KS_LIMIT_FILE)
        assert (limit["value"] >= 0).all()
        summary = read_summary(out)
        assert summary["command"] == "ks"
        assert summary["converged"] == "true"

    def test_negative_times(self, tmp_path, capsys):
        """L013: A time grid reaching below 0 is a configuration error."""
        path = tmp_path / "run.conf"
        path.write_text(BASE_CONFIG.replace("0, 1, 5", "-1, 1, 5") + "init = maxwellian_scaled:0.01\n")

        assert run(["ks", str(path)]) == 1
        assert "forward in time only" in capsys.readouterr().err


class TestScatterCommand:
    """sixwave scatter."""

    def test_forward(self, tmp_path):
        """L014: The forward limit is written as f_plus.csv with its history."""
        out = tmp_path / "out"

        assert run(["scatter", str(write_config(tmp_path)), "--output-dir", str(out)]) == 0

        history = pd.read_csv(out / constants.SCATTERING_FILE)
        assert list(history.columns) == constants.SCATTERING_COLUMNS
        assert (out / "f_plus.csv").is_file()
        summary = read_summary(out)
        assert summary["direction"] == "+"
        assert summary["tail_certified"] == "true"
        assert "roundtrip_defect" not in summary

    def test_minus_with_roundtrip(self, tmp_path):
        """L015: --direction - writes f_minus.csv; --roundtrip adds the defect."""
        out = tmp_path / "out"
        args = ["scatter", str(write_config(tmp_path)), "--output-dir", str(out), "--direction", "-", "--roundtrip"]

        assert run(args) == 0

        assert (out / "f_minus.csv").is_file()
        summary = read_summary(out)
        assert summary["direction"] == "-"
        assert float(summary["roundtrip_defect"]) < 1e-3 * float(summary["r_s"])

    def test_single_node_grid(self, tmp_path, capsys):
        """L023: A time grid with only t = 0 is a configuration error, not a crash."""
        path = tmp_path / "run.conf"
        path.write_text(BASE_CONFIG.replace("0, 1, 5", "0, 0, 1") + "init = maxwellian_scaled:0.01\n")

        assert run(["scatter", str(path)]) == 1
        assert "positive extent" in capsys.readouterr().err


class TestVerifyCommand:
    """sixwave verify."""

    def test_writes_results(self, tmp_path):
        """L016: The reduced suite passes and writes verify.csv."""
        assert run(["verify", "--output-dir", str(tmp_path)]) == 0

        frame = pd.read_csv(tmp_path / constants.VERIFY_FILE)
        assert list(frame.columns) == constants.VERIFY_COLUMNS
        assert frame["passed"].all()

    def test_failed_check_exits_1(self, tmp_path):
        """L017: Any failed check makes verify exit with code 1."""
        failing = [CheckResult("forced", 2.0, 1.0)]
        with patch("sixwave.cli.verify", return_value=failing):
            assert run(["verify", "--output-dir", str(tmp_path)]) == 1

        frame = pd.read_csv(tmp_path / constants.VERIFY_FILE)
        assert not frame["passed"].any()

    def test_seed_from_discovered_config(self, tmp_path):
        """L021: Without --seed the seed comes from the discovered config."""
        (tmp_path / "sixwave.conf").write_text("seed = 5\n")
        passing = [CheckResult("ok", 0.0, 1.0)]

        with patch("sixwave.cli.verify", return_value=passing) as mock_verify:
            assert run(["verify", "--output-dir", str(tmp_path)]) == 0
            assert run(["verify", "--seed", "2", "--output-dir", str(tmp_path)]) == 0

        assert [c.kwargs["seed"] for c in mock_verify.call_args_list] == [5, 2]

    def test_output_dir_from_environment(self, tmp_path):
        """L024: Without --output-dir, SIXWAVE_OUTPUT_DIR decides where verify.csv goes."""
        passing = [CheckResult("ok", 0.0, 1.0)]
        target = tmp_path / "from_env"

        with patch("sixwave.cli.verify", return_value=passing):
            with patch.dict(os.environ, {constants.ENV_OUTPUT_DIR: str(target)}):
                assert run(["verify"]) == 0

        assert (target / constants.VERIFY_FILE).is_file()
        assert not (tmp_path / constants.VERIFY_FILE).exists()

    def test_output_dir_from_config(self, tmp_path):
        """L025: output_dir in the discovered config is used; --output-dir still wins."""
        (tmp_path / "sixwave.conf").write_text("output_dir = from_config\n")
        passing = [CheckResult("ok", 0.0, 1.0)]

        with patch("sixwave.cli.verify", return_value=passing):
            assert run(["verify"]) == 0
            assert run(["verify", "--output-dir", str(tmp_path / "flag")]) == 0

        assert (tmp_path / "from_config" / constants.VERIFY_FILE).is_file()
        assert (tmp_path / "flag" / constants.VERIFY_FILE).is_file()


class TestParser:
    """Top-level options."""

    def test_version(self, capsys):
        """L018: --version prints the package version and exits 0."""
        assert run(["--version"]) == 0
        assert __version__ in capsys.readouterr().out

    def test_missing_command(self):
        """L019: No subcommand is a usage error."""
        assert run([]) == 1

    def test_unknown_direction(self, tmp_path):
        """L020: An unsupported --direction is a usage error."""
        assert run(["scatter", str(write_config(tmp_path)), "--direction", "up"]) == 1
