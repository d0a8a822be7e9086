"""The command-line surface: flags, outputs, exit codes."""
import numpy as np
import pytest

from seqobf.cli import main
from seqobf.superstring import verify_superstring


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def data_lines(out):
    return [line for line in out.strip().splitlines() if not line.startswith("#")]


class TestGenSuperstring:
    def test_emits_a_verified_shortest_superstring(self, capsys):
        code, out, _ = run_cli(
            capsys, "gen-superstring", "--r", "3", "--l", "2",
            "--kind", "shortest", "--seed", "7",
        )
        assert code == 0
        symbols = [int(s) for s in data_lines(out)[0].split()]
        assert len(symbols) == 10
        assert verify_superstring(symbols, 3, 2)

    def test_prints_resolved_configuration_first(self, capsys):
        _, out, _ = run_cli(capsys, "gen-superstring", "--r", "2", "--l", "1")
        first = out.splitlines()[0]
        assert first.startswith("#")
        assert "r=2" in first and "seed=" in first

    def test_seed_env_var_sets_the_default(self, capsys, monkeypatch):
        monkeypatch.setenv("SEQOBF_SEED", "31")
        _, with_env, _ = run_cli(capsys, "gen-superstring", "--r", "3", "--l", "2")
        monkeypatch.delenv("SEQOBF_SEED")
        _, explicit, _ = run_cli(
            capsys, "gen-superstring", "--r", "3", "--l", "2", "--seed", "31"
        )
        assert data_lines(with_env) == data_lines(explicit)


class TestUsageErrors:
    def test_no_arguments_prints_usage(self, capsys):
        code, out, err = run_cli(capsys)
        assert code == 2
        assert "usage" in (out + err).lower()

    def test_unknown_flag(self, capsys):
        code, *_ = run_cli(capsys, "bounds", "--m", "10", "--which", "sbu",
                           "--frobnicate", "1")
        assert code == 2

    def test_contradictory_parameters(self, capsys):
        # Too short a trace for the gap/pattern combination.
        code, _, err = run_cli(
            capsys, "bounds", "--m", "20", "--r", "4", "--l", "3",
            "--h", "10", "--p", "0.1", "--which", "sbu",
        )
        assert code == 2
        assert "trace too short" in err

    def test_missing_file_is_a_runtime_error(self, capsys):
        code, _, err = run_cli(
            capsys, "detect", "--trace-file", "/nonexistent/t.txt",
            "--pattern", "0,1",
        )
        assert code == 1


class TestBounds:
    def test_reference_cell(self, capsys):
        code, out, _ = run_cli(
            capsys, "bounds", "--m", "1000", "--r", "20", "--l", "3",
            "--h", "10", "--p", "0.1", "--which", "slsbu",
        )
        assert code == 0
        header, row = data_lines(out)
        value = float(row.split(",")[-1])
        assert abs(100 * value - 0.45) <= 0.01

    def test_lov_bound(self, capsys):
        code, out, _ = run_cli(
            capsys, "bounds", "--m", "100", "--r", "5", "--p", "1.0",
            "--which", "lov",
        )
        assert code == 0
        value = float(data_lines(out)[1].split(",")[-1])
        assert value == pytest.approx(1.0)

    def test_schedule(self, capsys):
        code, out, _ = run_cli(
            capsys, "bounds", "--which", "schedule", "--m", "10000",
            "--l", "2", "--n", "10000", "--beta", "0.5", "--theta", "0.25",
        )
        assert code == 0
        header, row = data_lines(out)
        record = dict(zip(header.split(","), row.split(",")))
        assert float(record["noise_level"]) == pytest.approx(0.1)
        assert record["noise_samples_ok"] == "True"

    def test_schedule_requires_its_flags(self, capsys):
        code, *_ = run_cli(capsys, "bounds", "--m", "100", "--which", "schedule")
        assert code == 2


class TestObfuscateAndDetect:
    def test_round_trip(self, tmp_path, capsys):
        src = tmp_path / "in.txt"
        dst = tmp_path / "out.txt"
        src.write_text("0 1 2 0 1 2 0 1 2 0 1 2\n1 1 1 1 1 1 1 1 1 1 1 1\n")
        code, out, _ = run_cli(
            capsys, "obfuscate", "--method", "sl_sbu", "--p-obf", "0.5",
            "--l", "2", "--r", "4", "--seed", "3",
            "--in", str(src), "--out", str(dst),
        )
        assert code == 0
        rows = dst.read_text().strip().splitlines()
        assert len(rows) == 2
        assert all(0 <= int(s) < 4 for s in rows[0].split())

        code, out, _ = run_cli(
            capsys, "detect", "--trace-file", str(dst), "--pattern", "1", "--h", "1",
        )
        assert code == 0
        lines = data_lines(out)
        assert lines[0] == "trace,contains,first_index"
        assert len(lines) == 3

    def test_two_stage_flags(self, tmp_path, capsys):
        src = tmp_path / "in.txt"
        dst = tmp_path / "out.txt"
        src.write_text(" ".join("0" for _ in range(50)) + "\n")
        code, *_ = run_cli(
            capsys, "obfuscate", "--method", "two_stage", "--stage-a", "0.3",
            "--stage-b", "0.3", "--l", "2", "--r", "4", "--seed", "2",
            "--in", str(src), "--out", str(dst),
        )
        assert code == 0
        symbols = [int(s) for s in dst.read_text().split()]
        assert len(symbols) == 50
        assert any(s != 0 for s in symbols)

    def test_detect_reports_first_occurrence(self, tmp_path, capsys):
        path = tmp_path / "t.txt"
        path.write_text("2 0 1 0 1\n")
        _, out, _ = run_cli(
            capsys, "detect", "--trace-file", str(path), "--pattern", "0,1",
        )
        row = data_lines(out)[1]
        assert row == "0,True,2"

    def test_detect_with_unbounded_gap(self, tmp_path, capsys):
        path = tmp_path / "t.txt"
        path.write_text("1 2 2 2 0\n")
        _, out, _ = run_cli(
            capsys, "detect", "--trace-file", str(path), "--pattern", "1 0",
            "--h", "inf",
        )
        assert data_lines(out)[1] == "0,True,"


class TestSimulateAndIngest:
    def test_fraction_spec_file(self, tmp_path, capsys):
        spec = tmp_path / "exp.ini"
        spec.write_text(
            "[experiment]\n"
            "scenario = fraction\n"
            "methods = iid, sl_sbu\n"
            "iterations = 5\n"
            "seed = 11\n"
            "[parameters]\n"
            "m = 100\nr = 8\nl = 2\nh = 5\np_obf = 0.2\nn_users = 10\n"
        )
        out_csv = tmp_path / "res.csv"
        code, out, _ = run_cli(
            capsys, "simulate", "--spec", str(spec), "--out", str(out_csv),
        )
        assert code == 0
        lines = out_csv.read_text().strip().splitlines()
        assert lines[0].startswith("scenario,method,")
        assert len(lines) == 3

    def test_sweep_spec_with_grid(self, tmp_path, capsys):
        spec = tmp_path / "exp.ini"
        spec.write_text(
            "[experiment]\n"
            "scenario = fraction\nmethods = iid\niterations = 3\nseed = 1\n"
            "[parameters]\n"
            "m = 60\nr = 6\nl = 2\nh = 3\np_obf = 0.1:0.1:0.3\nn_users = 6\n"
        )
        out_csv = tmp_path / "res.csv"
        code, *_ = run_cli(capsys, "simulate", "--spec", str(spec),
                           "--out", str(out_csv))
        assert code == 0
        lines = out_csv.read_text().strip().splitlines()
        assert len(lines) == 4  # header + three grid points

    def test_ingest_end_to_end(self, tmp_path, capsys):
        raw = tmp_path / "raw.csv"
        rows = ["user_id,timestamp,category"]
        for i in range(40):
            rows.append(f"u1,{i * 700},cat{i % 3}")
            rows.append(f"u2,{i * 700},cat{(i + 1) % 3}")
        raw.write_text("\n".join(rows) + "\n")
        out = tmp_path / "traces.txt"
        code, _, _ = run_cli(
            capsys, "ingest", "--in", str(raw), "--min-interval", "600",
            "--r", "3", "--out", str(out),
        )
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 2
        assert all(0 <= int(s) < 3 for s in lines[0].split())
