"""
Integration tests for metastable/cli.py

Tests cover:
- analyze: console table, JSON report, exit codes for bad input
- verify-exit / verify-resolvent / verify-occupation: passing and failing checks
- simulate: JSON trajectory on stdout and in a file
- kawasaki: parameter errors and landscape output (slow)
- Global options: --config, --check-log
- run(): exit codes without SystemExit
"""
import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from metastable.cli import EXIT_CHECK_FAILED, EXIT_INPUT_ERROR, app, run
from metastable.core.landscape import load_landscape

pytestmark = pytest.mark.integration

runner = CliRunner()


@pytest.fixture
def W_path(test_data_dir: Path) -> str:
    return str(test_data_dir / "W.json")


@pytest.fixture
def pair_path(test_data_dir: Path) -> str:
    return str(test_data_dir / "exit_pair.json")


class TestAnalyze:
    """Test the analyze command."""

    def test_analyze_w(self, W_path, tmp_path: Path):
        """Test a full run on W with a JSON report."""
        out = tmp_path / "report.json"
        result = runner.invoke(app, ["analyze", W_path, "--report", str(out)])
        assert result.exit_code == 0, result.output
        assert "Hierarchy" in result.output

        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["gamma_stars"] == [1, 2, 3]
        assert report["nus"] == [3, 2, 1]
        assert report["terminal"] == 3
        assert report["phi_bar"] == 3
        assert [1, 0, "1/4"] in report["levels"][1]["rates"]
        assert all(check["pass"] for check in report["checks"])
        assert report["config"]["run"]["command"] == "analyze"

    def test_report_is_deterministic(self, W_path, tmp_path: Path):
        """Test that two runs write byte-identical reports."""
        out = tmp_path / "report.json"
        runner.invoke(app, ["analyze", W_path, "-o", str(out)])
        first = out.read_bytes()
        runner.invoke(app, ["analyze", W_path, "-o", str(out)])
        assert out.read_bytes() == first

    def test_missing_file(self, tmp_path: Path):
        """Test that a missing landscape is an input error."""
        result = runner.invoke(app, ["analyze", str(tmp_path / "nope.json")])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_malformed_file(self, tmp_path: Path):
        """Test that a syntax error is an input error."""
        path = tmp_path / "bad.json"
        path.write_text("{", encoding="utf-8")
        result = runner.invoke(app, ["analyze", str(path)])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_single_ground(self, tmp_path: Path):
        """Test that a landscape with one ground state is an input error."""
        path = tmp_path / "one.json"
        path.write_text(json.dumps({"states": [{"energy": 0}, {"energy": 1}], "edges": [[0, 1]]}), encoding="utf-8")
        result = runner.invoke(app, ["analyze", str(path)])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_config_file(self, W_path, test_data_dir: Path):
        """Test that --config is accepted."""
        result = runner.invoke(app, ["--config", str(test_data_dir / "test_config.yaml"), "analyze", W_path])
        assert result.exit_code == 0, result.output

    def test_missing_config(self, W_path, tmp_path: Path):
        """Test that a missing config file is an input error."""
        result = runner.invoke(app, ["--config", str(tmp_path / "nope.yaml"), "analyze", W_path])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_check_log(self, W_path, tmp_path: Path):
        """Test that every check is appended to the JSONL log."""
        log = tmp_path / "checks.jsonl"
        result = runner.invoke(app, ["--check-log", str(log), "analyze", W_path])
        assert result.exit_code == 0, result.output
        entries = [json.loads(line) for line in log.read_text(encoding="utf-8").splitlines()]
        assert entries
        assert all(entry["check"].startswith("classification/") for entry in entries)
        assert all("timestamp" in entry for entry in entries)


class TestVerify:
    """Test the verification commands."""

    def test_exit_passes(self, pair_path, tmp_path: Path):
        """Test the exit law of the flat pair without Monte Carlo."""
        out = tmp_path / "exit.json"
        result = runner.invoke(app, [
            "verify-exit", pair_path, "--cycle", "a,b", "--beta-grid", "5,10,20", "--mc", "0", "-o", str(out),
        ])
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["suite"] == "exit"
        limit = next(c for c in report["checks"] if c["check"] == "exit/limit")
        assert limit["observed"] == {"x1": "1/3", "x2": "2/3"}

    def test_exit_with_monte_carlo(self, pair_path):
        """Test the Monte Carlo check at a moderate beta."""
        result = runner.invoke(app, [
            "verify-exit", pair_path, "--cycle", "0,1", "--beta-grid", "5,10,20", "--mc", "4000", "--seed", "1",
        ])
        assert result.exit_code == 0, result.output

    def test_exit_fails_at_high_temperature(self, pair_path):
        """Test that a gap above tolerance fails with exit code 1."""
        result = runner.invoke(app, ["verify-exit", pair_path, "--cycle", "a,b", "--beta-grid", "0.5", "--mc", "0"])
        assert result.exit_code == EXIT_CHECK_FAILED

    def test_exit_not_a_cycle(self, pair_path):
        """Test that a non-cycle is an input error."""
        result = runner.invoke(app, ["verify-exit", pair_path, "--cycle", "x1,a", "--mc", "0"])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_exit_unknown_state(self, pair_path):
        """Test that an unknown label is an input error."""
        result = runner.invoke(app, ["verify-exit", pair_path, "--cycle", "zz", "--mc", "0"])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_bad_grid(self, pair_path):
        """Test that a malformed beta grid is a usage error."""
        result = runner.invoke(app, ["verify-exit", pair_path, "--cycle", "a,b", "--beta-grid", "5,abc"])
        assert result.exit_code == 2

    def test_resolvent_passes(self, W_path):
        """Test the resolvent condition on the first level of W."""
        result = runner.invoke(app, ["verify-resolvent", W_path, "--level", "1", "--beta-grid", "4,6,8"])
        assert result.exit_code == 0, result.output

    def test_resolvent_level_out_of_range(self, W_path):
        """Test that a level past the terminal one is an input error."""
        result = runner.invoke(app, ["verify-resolvent", W_path, "--level", "5"])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_occupation_passes(self, W_path, tmp_path: Path):
        """Test occupation and first-hit splits on the first level of W."""
        out = tmp_path / "occ.json"
        result = runner.invoke(app, [
            "verify-occupation", W_path, "--level", "1", "--beta", "10", "--runs", "500",
            "--split-runs", "2000", "--seed", "1", "-o", str(out),
        ])
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text(encoding="utf-8"))
        names = [c["check"] for c in report["checks"]]
        assert names.count("occupation/first-hit-split") == 2
        assert "occupation/outside-valleys" in names


class TestSimulate:
    """Test the simulate command."""

    def test_stdout(self, W_path):
        """Test a trajectory printed as JSON."""
        result = runner.invoke(app, ["simulate", W_path, "--start", "s2", "--beta", "2", "--hit", "s4", "--seed", "1"])
        assert result.exit_code == 0, result.output
        document = json.loads(result.stdout)
        assert document["stop_reason"] == "hit"
        assert document["final_state"] == "s4"
        assert document["jumps"][0][0] == "s2"
        assert document["seed"] == 1

    def test_output_file(self, W_path, tmp_path: Path):
        """Test a budget-limited trajectory written to a file."""
        out = tmp_path / "traj.json"
        result = runner.invoke(app, [
            "simulate", W_path, "--start", "3", "--beta", "1", "--budget", "2.5", "--output", str(out),
        ])
        assert result.exit_code == 0, result.output
        document = json.loads(out.read_text(encoding="utf-8"))
        assert document["stop_reason"] == "time"
        assert document["duration"] == pytest.approx(2.5)

    def test_no_stop_rule(self, W_path):
        """Test that a run without hit set or budget is an input error."""
        result = runner.invoke(app, ["simulate", W_path, "--start", "s2", "--beta", "2"])
        assert result.exit_code == EXIT_INPUT_ERROR


class TestKawasaki:
    """Test the kawasaki command."""

    def test_invalid_geometry(self):
        """Test that K <= L is an input error."""
        result = runner.invoke(app, ["kawasaki", "--K", "4", "--L", "4", "--N0", "2"])
        assert result.exit_code == EXIT_INPUT_ERROR

    @pytest.mark.slow
    def test_emit_landscape(self, tmp_path: Path):
        """Test that the enumerated landscape is written and reloads."""
        out = tmp_path / "kawasaki.json"
        result = runner.invoke(app, ["kawasaki", "--K", "5", "--L", "4", "--N0", "2", "--emit-landscape", str(out)])
        assert result.exit_code == 0, result.output
        landscape = load_landscape(out)
        assert len(landscape.ground_states()) == 5
        assert min(landscape.energies) == -12


class TestRun:
    """Test run() without SystemExit."""

    def test_success(self, W_path):
        """Test a clean run."""
        assert run(["analyze", W_path]) == 0

    def test_input_error(self, tmp_path: Path):
        """Test the input error code."""
        assert run(["analyze", str(tmp_path / "nope.json")]) == EXIT_INPUT_ERROR

    def test_usage_error(self):
        """Test that an unknown option returns the usage exit code."""
        assert run(["analyze", "--bogus"]) == 2


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
