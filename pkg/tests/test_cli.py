import json
from pathlib import Path

import pytest

from roughfrac.cli import (CHECKS, ConfigError, main, parse_config, run_suite)

MINIMAL = """
[check:gap]
check = campanato_mean_gap
n = 1
b = log
p = 1
lambda = 0
rmin = 0.01
rmax = 100
count = 7
"""

QUICK_PASSING = """
[suite]
out = reports

[check:pair]
check = weight_pair_condition
n = 1
alpha = 1/4
s = 16/3
p = 2
p_i = 16/5
lambda_i = 0
regime = s_prime_le_q
phi1 = power:-1/2
phi2 = power:-1/4

[check:shell]
check = kernel_shell_bound
n = 1
kernel = one
s = 3
"""

WITH_FAILURE = QUICK_PASSING + """
[check:bad-pair]
check = weight_pair_condition
n = 1
alpha = 1/4
s = 16/3
p = 2
p_i = 16/5
lambda_i = 0
regime = s_prime_le_q
phi1 = power:-1/2
phi2 = one
rmin = 1e-6
rmax = 1
count = 19
"""

WITH_ERROR = """
[check:broken]
check = morrey_boundedness
n = 1
kernel = one
alpha = 1/4
s = 21
p = 3/2
p_i = 7/2
lambda_i = 0
regime = s_prime_le_q
b = sign
f = unit_ball
phi1 = power:-2/3
phi2 = one
"""


class TestParseConfig:
    def test_minimal_document(self):
        suite = parse_config(MINIMAL)
        assert len(suite.invocations) == 1
        assert suite.invocations[0].identifier == "gap"
        assert suite.invocations[0].check_name == "campanato_mean_gap"

    def test_empty_document_warns(self):
        suite = parse_config("")
        assert suite.invocations == []
        assert suite.warnings

    def test_unknown_check_name(self):
        with pytest.raises(ConfigError, match="unknown check"):
            parse_config("[check:x]\ncheck = nonsense\n")

    def test_missing_catalog_id(self):
        doc = MINIMAL.replace("b = log", "b = banana")
        with pytest.raises(ConfigError, match="banana"):
            parse_config(doc)

    def test_unknown_key_rejected(self):
        doc = MINIMAL.replace("p = 1", "p = 1\nmystery = 3")
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(doc)

    def test_exponent_coupling_violation_cites_relation(self):
        doc = """
[check:bad]
check = local_operator_bound
n = 1
kernel = one
alpha = 1/2
s = 4
p = 4/3
p_i =
regime = s_prime_le_q
q = 4/3
q1 = 3.9
f = unit_ball
"""
        with pytest.raises(ConfigError, match="1/q1 = 1/q - alpha/n"):
            parse_config(doc)

    def test_malformed_number(self):
        doc = MINIMAL.replace("p = 1", "p = one-and-a-half")
        with pytest.raises(ConfigError, match="not a number"):
            parse_config(doc)

    def test_duplicate_ids_rejected(self):
        # same section twice is a syntax error from the INI layer
        with pytest.raises(ConfigError):
            parse_config(MINIMAL + MINIMAL)
        # distinct sections that normalize to the same id are ours to catch
        doc = MINIMAL + MINIMAL.replace("[check:gap]", "[check: gap]")
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config(doc)

    def test_foreign_section_rejected(self):
        with pytest.raises(ConfigError, match="sections"):
            parse_config("[stuff]\nx = 1\n")


class TestRunSuite:
    def test_passing_suite(self, tmp_path):
        suite = parse_config(QUICK_PASSING)
        code = run_suite(suite, out_dir=str(tmp_path / "out"), log=lambda *a: None)
        assert code == 0
        out = tmp_path / "out"
        assert (out / "pair.json").exists()
        assert (out / "shell.json").exists()
        summary = (out / "summary.csv").read_text().strip().splitlines()
        assert summary[0] == "id,check,fitted_constant,stability_ratio,verdict"
        assert len(summary) == 3
        assert all(line.endswith("pass") for line in summary[1:])

    def test_failing_suite_exit_one(self, tmp_path):
        suite = parse_config(WITH_FAILURE)
        code = run_suite(suite, out_dir=str(tmp_path / "out"), log=lambda *a: None)
        assert code == 1
        summary = (tmp_path / "out" / "summary.csv").read_text()
        assert "fail" in summary

    def test_execution_error_exit_two(self, tmp_path):
        # precondition violation inside the check raises -> execution error
        suite = parse_config(WITH_ERROR)
        code = run_suite(suite, out_dir=str(tmp_path / "out"), log=lambda *a: None)
        assert code == 2
        assert "error" in (tmp_path / "out" / "summary.csv").read_text()

    def test_unwritable_output_directory(self, tmp_path):
        blocker = tmp_path / "blocked"
        blocker.write_text("a file, not a directory")
        suite = parse_config(QUICK_PASSING)
        code = run_suite(suite, out_dir=str(blocker / "sub"), log=lambda *a: None)
        assert code == 2

    def test_empty_suite_exit_zero(self, tmp_path):
        suite = parse_config("")
        code = run_suite(suite, out_dir=str(tmp_path / "out"), log=lambda *a: None)
        assert code == 0

    def test_reports_byte_identical_across_runs(self, tmp_path):
        suite1 = parse_config(QUICK_PASSING)
        suite2 = parse_config(QUICK_PASSING)
        run_suite(suite1, out_dir=str(tmp_path / "a"), log=lambda *a: None)
        run_suite(suite2, out_dir=str(tmp_path / "b"), log=lambda *a: None)
        for name in ("pair.json", "shell.json"):
            da = json.loads((tmp_path / "a" / name).read_text())
            db = json.loads((tmp_path / "b" / name).read_text())
            assert json.dumps(da["report"], sort_keys=True) == \
                json.dumps(db["report"], sort_keys=True)
        assert (tmp_path / "a" / "summary.csv").read_bytes() == \
            (tmp_path / "b" / "summary.csv").read_bytes()

    def test_threads_match_serial(self, tmp_path):
        serial = parse_config(QUICK_PASSING)
        parallel = parse_config(QUICK_PASSING)
        run_suite(serial, out_dir=str(tmp_path / "s"), log=lambda *a: None)
        run_suite(parallel, out_dir=str(tmp_path / "p"), threads=4,
                  log=lambda *a: None)
        for name in ("pair.json", "shell.json", "summary.csv"):
            da = (tmp_path / "s" / name).read_text()
            db = (tmp_path / "p" / name).read_text()
            if name.endswith(".json"):
                assert json.loads(da)["report"] == json.loads(db)["report"]
            else:
                assert da == db

    def test_report_embeds_resolved_configuration(self, tmp_path):
        suite = parse_config(QUICK_PASSING)
        run_suite(suite, out_dir=str(tmp_path / "out"), log=lambda *a: None)
        doc = json.loads((tmp_path / "out" / "pair.json").read_text())
        params = doc["report"]["parameters"]
        assert params["phi1"] == "power:-0.5"
        assert params["scheme"]["nodes_per_panel"] == 12
        assert params["exponents"]["q1"] == pytest.approx(16.0 / 9.0)
        assert "created_utc" in doc["meta"]


class TestMainEntry:
    def test_run_subcommand(self, tmp_path, capsys):
        config = tmp_path / "suite.ini"
        config.write_text(QUICK_PASSING)
        code = main(["run", str(config), "--out", str(tmp_path / "out")])
        assert code == 0
        assert "pair: pass" in capsys.readouterr().out

    def test_run_missing_config(self, tmp_path):
        assert main(["run", str(tmp_path / "nope.ini")]) == 2

    def test_run_bad_config(self, tmp_path):
        config = tmp_path / "suite.ini"
        config.write_text("[check:x]\ncheck = nonsense\n")
        assert main(["run", str(config)]) == 2

    def test_list_catalog(self, capsys):
        assert main(["list-catalog", "--n", "2"]) == 0
        out = capsys.readouterr().out
        assert "unit_ball" in out and "wavy" in out

    def test_describe_check(self, capsys):
        assert main(["describe-check", "weight_pair_condition"]) == 0
        out = capsys.readouterr().out
        assert "phi1" in out

    def test_describe_unknown_check(self):
        assert main(["describe-check", "nonsense"]) == 2

    def test_registry_covers_all_checks(self):
        expected = {
            "size_condition", "lebesgue_boundedness", "kernel_shell_bound",
            "campanato_cross_mean", "campanato_mean_gap",
            "campanato_scaled_oscillation", "local_operator_bound",
            "commutator_local_bound", "weight_pair_condition",
            "weight_pair_vanishing", "morrey_boundedness",
            "vanishing_implication",
        }
        assert set(CHECKS) == expected
