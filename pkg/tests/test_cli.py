"""Command-line contract: columns, formatting, exit codes, determinism."""

import json
import math

import pytest
from click.testing import CliRunner

from qdetnet.cli import main, SWEEP_FIELDS


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args, env=None):
    return runner.invoke(main, list(args), env=env, catch_exceptions=False)


class TestSweep:
    def test_single_pgm_row(self, runner):
        res = run(runner, "sweep", "--strategy", "pgm", "--n", "2",
                  "--theta", repr(math.pi / 8), "--probe", "entangled")
        assert res.exit_code == 0
        lines = res.output.strip().splitlines()
        assert lines[0] == ",".join(SWEEP_FIELDS)
        assert len(lines) == 2
        row = dict(zip(SWEEP_FIELDS, lines[1].split(",")))
        assert abs(float(row["closed_form_success"]) - 0.8535534) < 5e-8
        assert row["N"] == "2" and row["k"] == "1"
        assert row["degenerate"] == "0"

    def test_degenerate_phase_row(self, runner):
        res = run(runner, "sweep", "--strategy", "pgm", "--n", "4", "--theta", "0")
        assert res.exit_code == 0
        row = dict(zip(SWEEP_FIELDS, res.output.strip().splitlines()[1].split(",")))
        assert row["degenerate"] == "1"
        assert float(row["closed_form_success"]) == pytest.approx(0.25)

    def test_byte_identical_reruns(self, runner):
        args = ("sweep", "--strategy", "pgm", "--n", "2,4,6",
                "--theta", "0.1:0.7:7", "--probe", "separable")
        a = run(runner, *args)
        b = run(runner, *args)
        assert a.exit_code == 0
        assert a.output == b.output

    def test_seventeen_significant_digits(self, runner):
        res = run(runner, "sweep", "--strategy", "min_error", "--n", "2",
                  "--theta", "0.3")
        row = dict(zip(SWEEP_FIELDS, res.output.strip().splitlines()[1].split(",")))
        # 0.5*(1+sin 0.6) to full double precision
        assert row["closed_form_success"] == f"{0.5 * (1 + math.sin(0.6)):.17g}"

    def test_row_ordering(self, runner):
        res = run(runner, "sweep", "--strategy", "pgm", "--n", "4,2",
                  "--theta", "0.5,0.1")
        lines = res.output.strip().splitlines()[1:]
        keys = [(int(r.split(",")[1]), float(r.split(",")[3])) for r in lines]
        assert keys == sorted(keys)

    def test_json_output(self, runner):
        res = run(runner, "sweep", "--strategy", "one_or_none", "--n", "2",
                  "--theta", "0.3", "--p", "0.5", "--format", "json")
        assert res.exit_code == 0
        payload = json.loads(res.output)
        assert len(payload) == 1
        assert set(payload[0]) == set(SWEEP_FIELDS)
        assert payload[0]["p"] == 0.5

    def test_degrees_flag(self, runner):
        res_deg = run(runner, "sweep", "--strategy", "min_error", "--n", "2",
                      "--theta", "45", "--degrees")
        res_rad = run(runner, "sweep", "--strategy", "min_error", "--n", "2",
                      "--theta", repr(math.pi / 4))
        assert res_deg.output == res_rad.output

    def test_p_grid_multiplies_rows(self, runner):
        res = run(runner, "sweep", "--strategy", "pgm_null", "--n", "4",
                  "--theta", "0.3", "--p", "0,0.5,0.9")
        assert len(res.output.strip().splitlines()) == 4

    def test_unambiguous_dispatches_on_n(self, runner):
        res = run(runner, "sweep", "--strategy", "unambiguous", "--n", "2,4",
                  "--theta", "0.4")
        lines = res.output.strip().splitlines()[1:]
        strategies_seen = {line.split(",")[0] for line in lines}
        assert strategies_seen == {"unambiguous_two_detector", "unambiguous_symmetric"}

    def test_output_file(self, runner, tmp_path):
        out = tmp_path / "rows.csv"
        res = run(runner, "sweep", "--strategy", "pgm", "--n", "2",
                  "--theta", "0.3", "--out", str(out))
        assert res.exit_code == 0
        assert out.read_text().startswith(",".join(SWEEP_FIELDS))


class TestSweepErrors:
    def test_bad_theta_range(self, runner):
        res = runner.invoke(main, ["sweep", "--strategy", "pgm", "--n", "2",
                                   "--theta", "1.0"])
        assert res.exit_code == 2

    def test_bad_strategy(self, runner):
        res = runner.invoke(main, ["sweep", "--strategy", "teleport",
                                   "--n", "2", "--theta", "0.3"])
        assert res.exit_code == 2

    def test_bad_n(self, runner):
        res = runner.invoke(main, ["sweep", "--strategy", "pgm", "--n", "1",
                                   "--theta", "0.3"])
        assert res.exit_code == 2

    def test_missing_p_for_null_strategy(self, runner):
        res = runner.invoke(main, ["sweep", "--strategy", "pgm_null", "--n", "4",
                                   "--theta", "0.3"])
        assert res.exit_code == 2

    def test_odd_n_unambiguous(self, runner):
        res = runner.invoke(main, ["sweep", "--strategy", "unambiguous",
                                   "--n", "5", "--theta", "0.3"])
        assert res.exit_code == 2

    def test_unwritable_output_path(self, runner):
        res = runner.invoke(main, ["sweep", "--strategy", "pgm", "--n", "2",
                                   "--theta", "0.3", "--out",
                                   "/nonexistent-dir/rows.csv"])
        assert res.exit_code == 3


class TestConfigFile:
    def test_env_config_supplies_defaults(self, runner, tmp_path):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("strategy = pgm\nn = 2\ntheta = 0.3\nprobe = separable\n")
        res = run(runner, "sweep", env={"QDETNET_CONFIG": str(cfg)})
        assert res.exit_code == 0
        row = res.output.strip().splitlines()[1]
        assert row.startswith("pgm_symmetric_separable,2")

    def test_flags_override_config(self, runner, tmp_path):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("strategy = pgm\nn = 2\ntheta = 0.3\nprobe = separable\n")
        res = run(runner, "sweep", "--probe", "entangled",
                  env={"QDETNET_CONFIG": str(cfg)})
        row = res.output.strip().splitlines()[1]
        assert row.startswith("pgm_symmetric_entangled,2")


class TestReport:
    def test_single_point(self, runner):
        res = run(runner, "report", "--strategy", "pgm", "--n", "4",
                  "--theta", repr(math.pi / 8))
        lines = res.output.strip().splitlines()
        assert len(lines) == 2
        row = dict(zip(SWEEP_FIELDS, lines[1].split(",")))
        assert abs(float(row["closed_form_success"]) - 0.6294095) < 5e-8


class TestVerifyCommand:
    def test_quick_preset_passes(self, runner):
        res = run(runner, "verify", "--preset", "quick")
        assert res.exit_code == 0
        last = res.output.strip().splitlines()[-1]
        m, n = last.removeprefix("PASS ").split("/")
        assert m == n

    def test_unknown_preset(self, runner):
        res = runner.invoke(main, ["verify", "--preset", "exhaustive"])
        assert res.exit_code == 2

    def test_zero_tolerance_fails(self, runner):
        res = runner.invoke(main, ["verify", "--preset", "quick",
                                   "--tolerance", "0"])
        assert res.exit_code == 1

    def test_deterministic_output(self, runner):
        a = run(runner, "verify", "--preset", "quick")
        b = run(runner, "verify", "--preset", "quick")
        assert a.output == b.output


class TestOptimizeCommand:
    def test_min_overlap_octant(self, runner):
        res = run(runner, "optimize", "--n", "2", "--theta", repr(math.pi / 8),
                  "--objective", "min_overlap", "--restarts", "6", "--seed", "9")
        assert res.exit_code == 0
        values = dict(line.split("=", 1) for line in res.output.strip().splitlines()
                      if "=" in line and not line.startswith("objective"))
        assert abs(float(values["min_abs_overlap"]) - 0.7071068) < 1e-7
        assert abs(float(values["analytic_reference"]) - math.cos(math.pi / 4)) < 1e-15

    def test_maximal_phase_reaches_zero(self, runner):
        res = run(runner, "optimize", "--n", "2", "--theta", repr(math.pi / 4),
                  "--objective", "min_overlap", "--restarts", "6", "--seed", "9")
        values = dict(line.split("=", 1) for line in res.output.strip().splitlines()
                      if "=" in line and not line.startswith("objective"))
        assert float(values["min_abs_overlap"]) <= 1e-8

    def test_repeat_identical(self, runner):
        args = ("optimize", "--n", "2", "--theta", "0.3", "--restarts", "5",
                "--seed", "21")
        assert run(runner, *args).output == run(runner, *args).output

    def test_unsupported_n(self, runner):
        res = runner.invoke(main, ["optimize", "--n", "9", "--theta", "0.3"])
        assert res.exit_code == 2

    def test_probe_search_objective(self, runner):
        res = run(runner, "optimize", "--n", "2", "--theta", "0.4",
                  "--objective", "one_or_none", "--restarts", "8", "--seed", "3")
        assert res.exit_code == 0
        assert "passed=True" in res.output
