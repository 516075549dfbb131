import json

from pytest import mark, raises

from bb84_probe import cli
from bb84_probe.export import load_strategy
from bb84_probe.probe import build_optimal


def run_cli(argv):
    with raises(SystemExit) as exc:
        cli.main(argv)
    return exc.value.code


class TestTradeoff:
    def test_csv_file(self, tmp_path, capsys):
        out = tmp_path / "curve.csv"
        assert run_cli(["tradeoff", "--d-min", "0", "--d-max", "0.5", "--step", "0.01", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 52
        assert "Threshold: d = 0.14644661" in capsys.readouterr().err

    def test_json_stdout(self, capsys):
        assert run_cli(["tradeoff", "--format", "json"]) == 0
        rows = json.loads(capsys.readouterr().out)
        assert len(rows) == 51
        row = next(r for r in rows if r["d"] == 0.15)
        assert row["secure"] is False

    def test_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli(["tradeoff", "--out", str(a)])
        run_cli(["tradeoff", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_invalid_range(self, capsys):
        assert run_cli(["tradeoff", "--d-min", "0.4", "--d-max", "0.1"]) == 2
        assert "Error:" in capsys.readouterr().err

    def test_baseline(self, capsys):
        assert run_cli(["tradeoff", "--d-max", "0.1", "--baseline"]) == 0
        assert "Intercept-resend: d = 0.25" in capsys.readouterr().err


class TestSimulate:
    def test_attack_off(self, tmp_path):
        out = tmp_path / "sim.json"
        assert run_cli(["simulate", "--n", "5000", "--attack", "off", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["summary"]["bob_error_rate"] == 0
        assert doc["summary"]["eve_guess_accuracy"] is None
        assert doc["config"]["attack_enabled"] is False
        assert "wall_time_s" not in doc

    def test_repeatable_output(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["simulate", "--n", "20000", "--d", "0.1", "--seed", "9"]
        run_cli(args + ["--out", str(a)])
        run_cli(args + ["--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_timing_flag(self, capsys):
        assert run_cli(["simulate", "--n", "1000", "--timing"]) == 0
        assert "wall_time_s" in json.loads(capsys.readouterr().out)

    def test_bad_flags(self):
        assert run_cli(["simulate", "--n", "0"]) == 2
        assert run_cli(["simulate", "--attack", "maybe"]) == 2


class TestStrategyDump:
    def test_round_trip(self, tmp_path):
        out = tmp_path / "s.json"
        assert run_cli(["strategy-dump", "--dxy", "0.2", "--duv", "0.1", "--out", str(out)]) == 0
        assert (load_strategy(out).isometry == build_optimal(0.2, 0.1).strategy().isometry).all()

    def test_out_of_range(self):
        assert run_cli(["strategy-dump", "--dxy", "0.7"]) == 2


class TestVerify:
    def test_equality_suite(self, capsys):
        assert run_cli(["verify", "--suite", "equality"]) == 0
        out = capsys.readouterr().out
        assert "(1, 1, -1, -1)" in out
        assert "FAIL" not in out

    def test_unknown_suite(self):
        assert run_cli(["verify", "--suite", "nope"]) == 2


class TestOptimize:
    @mark.slow
    def test_report(self, tmp_path):
        out = tmp_path / "opt.json"
        code = run_cli(["optimize", "--d", "0.1", "--restarts", "2", "--seed", "1", "--out", str(out)])
        doc = json.loads(out.read_text())
        assert code == 0
        assert doc["converged"] is True
        assert doc["config"]["measurement"] == "projective"
        assert "gap_to_bound_nats" in doc

    def test_bad_probe_dim(self):
        assert run_cli(["optimize", "--probe-dim", "3"]) == 2


def test_version(capsys):
    assert run_cli(["--version"]) == 0
    assert "bb84-probe 1.0.0" in capsys.readouterr().out
