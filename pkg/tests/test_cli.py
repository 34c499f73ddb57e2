"""CLI subcommands, exit codes, and output determinism."""

import numpy as np
import pytest

from lqmc.cli import (EXIT_DIVERGENCE, EXIT_OK, EXIT_VALIDATION, main)


def run_cli(*argv):
    return main(list(argv))


class TestGen:
    def test_sequence_values(self, capsys):
        assert run_cli("gen", "-m", "3", "--offset", "1") == EXIT_OK
        out = capsys.readouterr().out.strip().split("\n")
        assert [float(v) for v in out] == [0.5, 0.125, 0.25, 0.625, 0.375, 0.875, 0.75]

    def test_full_period_distinct(self, tmp_path, capsys):
        out = tmp_path / "seq.csv"
        assert run_cli("--output", str(out), "gen", "-m", "10") == EXIT_OK
        vals = np.loadtxt(out)
        assert len(vals) == 1023
        assert len(np.unique(vals)) == 1023
        assert "period=1023" in capsys.readouterr().err

    def test_below_table_range_rejected(self, capsys):
        assert run_cli("gen", "-m", "2") == EXIT_VALIDATION
        assert "error" in capsys.readouterr().err

    def test_bad_offset_rejected(self):
        assert run_cli("gen", "-m", "4", "--offset", "3") == EXIT_VALIDATION

    def test_count_truncates(self, capsys):
        assert run_cli("gen", "-m", "5", "--count", "4") == EXIT_OK
        assert len(capsys.readouterr().out.strip().split("\n")) == 4

    def test_matrix_emission(self, tmp_path, capsys):
        out = tmp_path / "matrix.csv"
        assert run_cli("--output", str(out), "gen", "-m", "4", "--matrix", "3") == EXIT_OK
        rows = np.loadtxt(out, delimiter=",")
        assert rows.shape == (15, 3)
        assert "stored width 4" in capsys.readouterr().err

    def test_table_listing(self, capsys):
        assert run_cli("gen", "--table") == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("# m")
        assert "32  0x1000000af  2" in out


class TestDiscrepancy:
    def test_single_point(self, tmp_path, capsys):
        f = tmp_path / "pts.csv"
        f.write_text("0.5\n")
        assert run_cli("discrepancy", str(f), "--dim", "1") == EXIT_OK
        assert "star_discrepancy=0.5" in capsys.readouterr().out

    def test_empty_file(self, tmp_path, capsys):
        f = tmp_path / "pts.csv"
        f.write_text("")
        assert run_cli("discrepancy", str(f), "--dim", "1") == EXIT_VALIDATION
        assert "no points" in capsys.readouterr().err

    def test_malformed_line_is_located(self, tmp_path, capsys):
        f = tmp_path / "pts.csv"
        f.write_text("0.5,0.5\n0.2,oops\n")
        assert run_cli("discrepancy", str(f), "--dim", "2") == EXIT_VALIDATION
        assert "line 2" in capsys.readouterr().err

    def test_iid_comparison(self, tmp_path, capsys):
        f = tmp_path / "pts.csv"
        rows = [f"{k / 16},{(3 * k % 16) / 16}" for k in range(1, 16)]
        f.write_text("\n".join(rows) + "\n")
        code = run_cli("discrepancy", str(f), "--dim", "2", "--compare-iid", "5")
        assert code == EXIT_OK
        assert "iid_median=" in capsys.readouterr().out


class TestRun:
    SPEC = """
model: {kind: linear, n_obs: 8, dim: 3, data_seed: 2}
drive: {m_values: [4]}
schedules:
  - {kind: constant, h: 0.01}
run: {replicates: 3, seed: 5, test_functions: [coordinate]}
"""

    def test_report_and_sidecar(self, tmp_path):
        spec = tmp_path / "tiny.yaml"
        spec.write_text(self.SPEC)
        out = tmp_path / "report.csv"
        assert run_cli("--output", str(out), "run", str(spec)) == EXIT_OK
        text = out.read_text()
        assert text.startswith("model,method,m,n,schedule,test_fn,mse,stderr,replicates")
        assert (tmp_path / "report.csv.meta.yaml").exists()

    def test_identical_bytes_on_rerun(self, tmp_path):
        spec = tmp_path / "tiny.yaml"
        spec.write_text(self.SPEC)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli("--output", str(a), "run", str(spec)) == EXIT_OK
        assert run_cli("--output", str(b), "--threads", "3", "run", str(spec)) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_per_replicate_dump(self, tmp_path):
        spec = tmp_path / "tiny.yaml"
        spec.write_text(self.SPEC)
        out, dump = tmp_path / "r.csv", tmp_path / "reps.csv"
        assert run_cli("--output", str(out), "run", str(spec),
                       "--per-replicate", str(dump)) == EXIT_OK
        lines = dump.read_text().strip().split("\n")
        assert lines[0].startswith("model,method,m,schedule")
        assert len(lines) == 1 + 2 * 3  # methods x replicates for one family

    def test_unknown_model_fails_validation_before_work(self, tmp_path):
        spec = tmp_path / "bad.yaml"
        spec.write_text("model: {kind: pareto}\ndrive: {m_values: [4]}\n"
                        "schedules: [{kind: constant, h: 0.01}]\n")
        assert run_cli("run", str(spec)) == EXIT_VALIDATION

    def test_divergence_exit_code(self, tmp_path):
        spec = tmp_path / "diverge.yaml"
        spec.write_text(
            "model: {kind: linear, n_obs: 8, dim: 3, data_seed: 2}\n"
            "drive: {m_values: [4]}\n"
            "schedules: [{kind: constant, h: 5.0}]\n"
            "run: {replicates: 2, seed: 0, test_functions: [coordinate]}\n"
        )
        assert run_cli("run", str(spec)) == EXIT_DIVERGENCE

    def test_truth_cache_round_trip(self, tmp_path):
        spec = tmp_path / "tiny.yaml"
        spec.write_text(self.SPEC)
        cache = tmp_path / "truth.json"
        out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
        assert run_cli("--output", str(out1), "run", str(spec),
                       "--truth-cache", str(cache)) == EXIT_OK
        assert cache.exists()
        assert run_cli("--output", str(out2), "run", str(spec),
                       "--truth-cache", str(cache)) == EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()


class TestDiagnose:
    def test_quadratic_exact_ratio(self, capsys):
        assert run_cli("diagnose", "--model", "quadratic", "--dim", "1",
                       "--h", "0.5", "--steps", "4") == EXIT_OK
        out = capsys.readouterr().out
        lines = [l for l in out.strip().split("\n") if not l.startswith(("#", "step"))]
        dists = [float(l.split(",")[1]) for l in lines]
        ratios = np.array(dists[1:]) / np.array(dists[:-1])
        assert np.allclose(ratios, 0.5, atol=1e-12)
        assert "rho=0.5" in out

    def test_envelope_bounds_linear_model(self, capsys):
        assert run_cli("diagnose", "--model", "linear", "--dim", "10",
                       "--n-obs", "15", "--h", "0.0005", "--steps", "30") == EXIT_OK
        out = capsys.readouterr().out
        rows = [l.split(",") for l in out.strip().split("\n")
                if not l.startswith(("#", "step"))]
        dist = np.array([float(r[1]) for r in rows])
        env = np.array([float(r[2]) for r in rows])
        assert (dist <= env + 1e-12).all()

    def test_double_well_has_no_envelope(self, capsys):
        assert run_cli("diagnose", "--model", "double_well",
                       "--h", "0.01", "--steps", "3") == EXIT_OK
        out = capsys.readouterr().out
        assert "constants undeclared" in out

    def test_theory_violation_warns_but_runs(self, capsys):
        with pytest.warns(UserWarning):
            code = run_cli("diagnose", "--model", "quadratic", "--dim", "1",
                           "--h", "1.5", "--steps", "3")
        assert code == EXIT_OK
