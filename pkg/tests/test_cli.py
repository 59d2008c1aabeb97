"""Command-line surface: file formats, JSON schema, exit codes, and
reproducibility."""

import json
import subprocess
import sys

import pytest

from kfwer.cli import (
    EXIT_BAD_DATA,
    EXIT_BAD_FLAGS,
    EXIT_COUNTEREXAMPLE,
    EXIT_OK,
    main,
)

FIVE_PVALUES = "0.2\n0.015\n0.8\n0.001\n0.03\n"


@pytest.fixture
def pfile(tmp_path):
    path = tmp_path / "pvalues.txt"
    path.write_text(FIVE_PVALUES)
    return str(path)


def run_main(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCmdTest:
    def test_stepdown_lehmann_romano_report(self, pfile, capsys):
        code, out, _ = run_main(
            ["test", "--k", "2", "--alpha", "0.05", "--procedure", "stepdown",
             "--schedule", "lehmann-romano", "--input", pfile],
            capsys,
        )
        assert code == EXIT_OK
        report = json.loads(out)
        assert report["n"] == 5 and report["k"] == 2 and report["alpha"] == 0.05
        assert report["procedure"] == "stepdown"
        assert report["rejected"] == [2, 4]  # 1-based positions of the two smallest
        assert report["detail"] == {"r": 2}
        assert report["critical_values"][0] == 0.02

    def test_csv_input_with_header(self, tmp_path, capsys):
        path = tmp_path / "pvalues.csv"
        path.write_text("id,p\nalpha,0.2\nbeta,0.015\ngamma,0.8\ndelta,0.001\nepsilon,0.03\n")
        code, out, _ = run_main(
            ["test", "--k", "2", "--alpha", "0.05", "--procedure", "stepdown",
             "--schedule", "lehmann-romano", "--input", str(path)],
            capsys,
        )
        assert code == EXIT_OK
        assert json.loads(out)["rejected"] == [2, 4]

    def test_stdin_matches_file(self, pfile, capsys, monkeypatch):
        code_file, out_file, _ = run_main(
            ["test", "--k", "1", "--alpha", "0.1", "--procedure", "stepup",
             "--schedule", "lehmann-romano", "--input", pfile],
            capsys,
        )
        import io

        monkeypatch.setattr(sys, "stdin", io.StringIO(FIVE_PVALUES))
        code_stdin, out_stdin, _ = run_main(
            ["test", "--k", "1", "--alpha", "0.1", "--procedure", "stepup",
             "--schedule", "lehmann-romano"],
            capsys,
        )
        assert code_file == code_stdin == EXIT_OK
        assert out_file == out_stdin

    def test_hommel_constant_family_report(self, pfile, capsys):
        code, out, _ = run_main(
            ["test", "--k", "1", "--alpha", "0.05", "--procedure", "hommel",
             "--schedule", "constant", "--input", pfile],
            capsys,
        )
        assert code == EXIT_OK
        report = json.loads(out)
        assert isinstance(report["critical_values"][0], list)  # triangular table
        assert "j_hat" in report["detail"]

    def test_closed_detail_is_null(self, pfile, capsys):
        code, out, _ = run_main(
            ["test", "--k", "2", "--alpha", "0.05", "--procedure", "closed",
             "--schedule", "constant", "--input", pfile],
            capsys,
        )
        assert code == EXIT_OK
        assert json.loads(out)["detail"] is None

    def test_empty_input_exits_2(self, tmp_path, capsys):
        path = tmp_path / "empty.txt"
        path.write_text("")
        code, _, err = run_main(
            ["test", "--k", "1", "--alpha", "0.05", "--procedure", "stepdown",
             "--schedule", "lehmann-romano", "--input", str(path)],
            capsys,
        )
        assert code == EXIT_BAD_DATA
        assert "no p-values" in err

    def test_malformed_line_names_line_number(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("0.1\n0.2\nnot-a-number\n0.4\n")
        code, _, err = run_main(
            ["test", "--k", "1", "--alpha", "0.05", "--procedure", "stepdown",
             "--schedule", "lehmann-romano", "--input", str(path)],
            capsys,
        )
        assert code == EXIT_BAD_DATA
        assert "line 3" in err

    def test_out_of_range_pvalue_names_line(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("0.1\n1.2\n")
        code, _, err = run_main(
            ["test", "--k", "1", "--alpha", "0.05", "--procedure", "stepdown",
             "--schedule", "lehmann-romano", "--input", str(path)],
            capsys,
        )
        assert code == EXIT_BAD_DATA and "line 2" in err

    def test_missing_file_exits_2(self, capsys):
        code, _, err = run_main(
            ["test", "--k", "1", "--alpha", "0.05", "--procedure", "stepdown",
             "--schedule", "lehmann-romano", "--input", "/nonexistent/p.txt"],
            capsys,
        )
        assert code == EXIT_BAD_DATA

    def test_hommel_with_single_indexed_schedule_exits_3(self, pfile, capsys):
        code, _, err = run_main(
            ["test", "--k", "1", "--alpha", "0.05", "--procedure", "hommel",
             "--schedule", "lehmann-romano", "--input", pfile],
            capsys,
        )
        assert code == EXIT_BAD_FLAGS
        assert "family" in err

    def test_closed_with_too_many_hypotheses_exits_3(self, tmp_path, capsys):
        path = tmp_path / "many.txt"
        path.write_text("".join("0.5\n" for _ in range(20)))
        code, _, err = run_main(
            ["test", "--k", "1", "--alpha", "0.05", "--procedure", "closed",
             "--schedule", "constant", "--input", str(path)],
            capsys,
        )
        assert code == EXIT_BAD_FLAGS
        assert "18" in err

    def test_k_larger_than_n_exits_3(self, pfile, capsys):
        code, _, _ = run_main(
            ["test", "--k", "9", "--alpha", "0.05", "--procedure", "stepdown",
             "--schedule", "lehmann-romano", "--input", pfile],
            capsys,
        )
        assert code == EXIT_BAD_FLAGS

    def test_unknown_flag_exits_3(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["test", "--nope"])
        assert exc.value.code == EXIT_BAD_FLAGS

    def test_schedule_file(self, pfile, tmp_path, capsys):
        sched = tmp_path / "sched.txt"
        sched.write_text("0.02\n0.025\n0.033333\n0.05\n")
        code, out, _ = run_main(
            ["test", "--k", "2", "--alpha", "0.05", "--procedure", "stepdown",
             "--schedule", f"file:{sched}", "--input", pfile],
            capsys,
        )
        assert code == EXIT_OK
        assert json.loads(out)["rejected"] == [2, 4]

    def test_schedule_file_wrong_length_exits_2(self, pfile, tmp_path, capsys):
        sched = tmp_path / "sched.txt"
        sched.write_text("0.02\n0.025\n")
        code, _, _ = run_main(
            ["test", "--k", "2", "--alpha", "0.05", "--procedure", "stepdown",
             "--schedule", f"file:{sched}", "--input", pfile],
            capsys,
        )
        assert code == EXIT_BAD_DATA

    def test_family_csv_file(self, tmp_path, capsys):
        pv = tmp_path / "p.txt"
        pv.write_text("0.01\n0.04\n0.5\n")
        fam = tmp_path / "family.csv"
        rows = ["m,i,alpha", "2,2,0.05", "3,2,0.0333333333", "3,3,0.0333333333"]
        fam.write_text("\n".join(rows) + "\n")
        code, out, _ = run_main(
            ["test", "--k", "2", "--alpha", "0.05", "--procedure", "closed",
             "--schedule", f"file:{fam}", "--input", str(pv)],
            capsys,
        )
        assert code == EXIT_OK
        assert json.loads(out)["rejected"] == [1]

    def test_family_csv_incomplete_exits_2(self, tmp_path, capsys):
        pv = tmp_path / "p.txt"
        pv.write_text("0.01\n0.04\n0.5\n")
        fam = tmp_path / "family.csv"
        fam.write_text("m,i,alpha\n2,2,0.05\n3,2,0.03\n")  # missing (3,3)
        code, _, err = run_main(
            ["test", "--k", "2", "--alpha", "0.05", "--procedure", "closed",
             "--schedule", f"file:{fam}", "--input", str(pv)],
            capsys,
        )
        assert code == EXIT_BAD_DATA
        assert "missing" in err

    def test_romano_shaikh_requires_base(self, pfile, capsys):
        code, _, err = run_main(
            ["test", "--k", "1", "--alpha", "0.05", "--procedure", "stepup",
             "--schedule", "romano-shaikh", "--input", pfile],
            capsys,
        )
        assert code == EXIT_BAD_FLAGS
        assert "--base-schedule" in err

    def test_romano_shaikh_with_base(self, pfile, tmp_path, capsys):
        base = tmp_path / "base.txt"
        base.write_text("0.25\n0.5\n0.75\n1.0\n0.05\n")  # not sorted: exits 2
        code, _, _ = run_main(
            ["test", "--k", "1", "--alpha", "0.05", "--procedure", "stepup",
             "--schedule", "romano-shaikh", "--base-schedule", str(base), "--input", pfile],
            capsys,
        )
        assert code == EXIT_BAD_DATA
        base.write_text("0.2\n0.4\n0.6\n0.8\n1.0\n")
        code, out, _ = run_main(
            ["test", "--k", "1", "--alpha", "0.05", "--procedure", "stepup",
             "--schedule", "romano-shaikh", "--base-schedule", str(base), "--input", pfile],
            capsys,
        )
        assert code == EXIT_OK
        report = json.loads(out)
        assert len(report["critical_values"]) == 5

    def test_output_file(self, pfile, tmp_path, capsys):
        out_path = tmp_path / "report.json"
        code, out, _ = run_main(
            ["test", "--k", "2", "--alpha", "0.05", "--procedure", "stepdown",
             "--schedule", "lehmann-romano", "--input", pfile, "--output", str(out_path)],
            capsys,
        )
        assert code == EXIT_OK and out == ""
        assert json.loads(out_path.read_text())["rejected"] == [2, 4]


class TestCmdSimulate:
    BASE = ["simulate", "--n", "5", "--true-nulls", "5", "--k", "2", "--alpha", "0.05",
            "--reps", "50", "--seed", "9"]

    def test_report_fields(self, capsys):
        code, out, _ = run_main(self.BASE, capsys)
        assert code == EXIT_OK
        report = json.loads(out)
        assert set(report) == {"kfwer_estimate", "std_error", "avg_power", "config_echo"}
        assert report["config_echo"]["seed"] == 9
        assert report["avg_power"] is None

    def test_single_rep_is_binary(self, capsys):
        code, out, _ = run_main(
            ["simulate", "--n", "4", "--true-nulls", "4", "--k", "1", "--alpha", "0.05",
             "--reps", "1", "--seed", "3"],
            capsys,
        )
        assert code == EXIT_OK
        assert json.loads(out)["kfwer_estimate"] in (0.0, 1.0)

    def test_same_seed_byte_identical(self, capsys):
        _, first, _ = run_main(self.BASE, capsys)
        _, second, _ = run_main(self.BASE, capsys)
        assert first == second

    def test_true_nulls_above_n_exits_3(self, capsys):
        code, _, _ = run_main(
            ["simulate", "--n", "4", "--true-nulls", "5", "--k", "1", "--alpha", "0.05",
             "--reps", "10"],
            capsys,
        )
        assert code == EXIT_BAD_FLAGS

    def test_bad_rho_exits_3(self, capsys):
        code, _, _ = run_main(
            ["simulate", "--n", "4", "--true-nulls", "4", "--k", "1", "--alpha", "0.05",
             "--reps", "10", "--dependence", "equicorrelated", "--rho", "1.0"],
            capsys,
        )
        assert code == EXIT_BAD_FLAGS

    def test_seed_env_fallback(self, capsys, monkeypatch):
        argv = ["simulate", "--n", "4", "--true-nulls", "4", "--k", "1", "--alpha", "0.05",
                "--reps", "20"]
        monkeypatch.setenv("KFWER_SEED", "777")
        _, out_env, _ = run_main(argv, capsys)
        assert json.loads(out_env)["config_echo"]["seed"] == 777
        monkeypatch.delenv("KFWER_SEED")
        _, out_default, _ = run_main(argv, capsys)
        assert json.loads(out_default)["config_echo"]["seed"] == 0
        monkeypatch.setenv("KFWER_SEED", "777")
        _, out_flag, _ = run_main(argv + ["--seed", "5"], capsys)
        assert json.loads(out_flag)["config_echo"]["seed"] == 5


class TestCmdVerify:
    def test_theorem_42_passes(self, capsys):
        code, out, _ = run_main(["verify", "--theorem", "4.2", "--trials", "60", "--seed", "7"], capsys)
        assert code == EXIT_OK
        assert "theorem 4.2" in out and "ok" in out

    def test_all_theorems(self, capsys):
        code, out, _ = run_main(["verify", "--theorem", "all", "--trials", "25", "--seed", "1"], capsys)
        assert code == EXIT_OK
        for theorem in ("4.1", "4.2", "4.3", "4.4", "5.1"):
            assert f"theorem {theorem}" in out

    def test_reproducible_with_seed(self, capsys):
        argv = ["verify", "--theorem", "4.4", "--trials", "40", "--seed", "13"]
        _, first, _ = run_main(argv, capsys)
        _, second, _ = run_main(argv, capsys)
        assert first == second

    def test_self_test_rejects_invalid_family(self, capsys):
        code, out, _ = run_main(["verify", "--theorem", "5.1", "--self-test"], capsys)
        assert code == EXIT_OK
        assert "rejected before comparison" in out

    def test_bad_n_max_exits_3(self, capsys):
        code, _, _ = run_main(["verify", "--theorem", "4.2", "--n-max", "25"], capsys)
        assert code == EXIT_BAD_FLAGS

    def test_counterexample_exit_code_reserved(self):
        assert EXIT_COUNTEREXAMPLE == 1


def test_console_entry_point_runs():
    """Smoke the installed module entry end to end in a subprocess."""
    proc = subprocess.run(
        [sys.executable, "-m", "kfwer", "verify", "--theorem", "4.2", "--trials", "10", "--seed", "2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "theorem 4.2" in proc.stdout
