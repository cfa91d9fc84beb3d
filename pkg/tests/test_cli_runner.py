import csv
import json

import pytest

from warren.cli_runner import OUTPUT_DIR_ENV, ExperimentConfig, build_parser, resolve_config, run
from warren.errors import ValidationError


def _run(tmp_path, *argv):
    return run([*argv, "--output-dir", str(tmp_path), "--no-progress", "--log-level", "WARNING"])


def _json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


class TestConfig:
    def test_round_trip(self, tmp_path):
        cfg = ExperimentConfig(command="oracle", target="wishart", seed=4, output_dir=str(tmp_path))
        assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_key(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.from_dict({"bogus": 1})

    @pytest.mark.parametrize(
        "kwargs", [{"log_level": "LOUD"}, {"formats": ["xml"]}, {"plots": "yes"}, {"m": "two"}]
    )
    def test_invalid_values(self, kwargs):
        with pytest.raises(ValidationError):
            ExperimentConfig(**kwargs)

    def test_coercion(self):
        cfg = ExperimentConfig(m="3", dt=1, top=[1, 2], log_level="debug")
        assert cfg.m == 3 and isinstance(cfg.dt, float)
        assert cfg.top == [1.0, 2.0] and cfg.log_level == "DEBUG"

    def test_env_output_dir(self, monkeypatch, tmp_path):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
        assert ExperimentConfig().output_dir == str(tmp_path)

    def test_precedence(self, tmp_path):
        config_file = tmp_path / "cfg.json"
        config_file.write_text(json.dumps({"seed": 5, "draws": 100, "record-stride": 7}))
        args = build_parser().parse_args(
            ["oracle", "wishart", "--config", str(config_file), "--seed", "9"]
        )
        cfg = resolve_config(args)
        assert (cfg.command, cfg.target) == ("oracle", "wishart")
        assert (cfg.seed, cfg.draws, cfg.record_stride, cfg.n) == (9, 100, 7, 2)

    def test_stem(self):
        assert ExperimentConfig(command="check", target="da-integral").stem == "check_da_integral"
        assert ExperimentConfig(command="compare").stem == "compare"


class TestExitCodes:
    def test_missing_target(self, tmp_path, capsys):
        assert _run(tmp_path, "simulate") == 2
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["error"] == "UsageError"

    def test_unknown_flag(self, tmp_path, capsys):
        assert _run(tmp_path, "oracle", "wishart", "--bogus", "1") == 2
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["format_version"] == 1
        assert record["error"] == "UsageError"
        assert "--bogus" in record["message"]

    def test_bad_flag_value(self, tmp_path, capsys):
        assert _run(tmp_path, "oracle", "wishart", "--n", "two") == 2
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["error"] == "UsageError"

    def test_parameter_error(self, tmp_path, capsys):
        assert _run(tmp_path, "oracle", "jacobi", "--n", "3", "--p", "2", "--q", "4") == 1
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["format_version"] == 1
        assert record["error"] == "ParameterError"

    def test_jacobi_levels_bounded(self, tmp_path):
        argv = ("oracle", "multilevel-jacobi", "--k", "3", "--p", "2", "--q", "2")
        assert _run(tmp_path, *argv) == 1

    def test_unknown_config_key(self, tmp_path):
        config_file = tmp_path / "cfg.json"
        config_file.write_text(json.dumps({"bogus": 1}))
        assert _run(tmp_path, "oracle", "wishart", "--config", str(config_file)) == 1

    def test_missing_config_file(self, tmp_path):
        assert _run(tmp_path, "oracle", "wishart", "--config", str(tmp_path / "none.json")) == 1


class TestCommands:
    def test_oracle_wishart(self, tmp_path):
        argv = ("oracle", "wishart", "--n", "2", "--p", "2", "--t", "0.5", "--draws", "20000")
        assert _run(tmp_path, *argv, "--seed", "7") == 0
        doc = _json(tmp_path / "oracle_wishart.json")
        assert doc["format_version"] == 1
        assert doc["config"]["seed"] == 7
        assert doc["trace_target"] == pytest.approx(2.0)
        assert abs(doc["trace_mean"] - 2.0) <= 4.0 * doc["trace_stderr"]
        rows = _rows(tmp_path / "oracle_wishart.csv")
        assert rows[0] == ["draw", "lambda1", "lambda2"]
        assert len(rows) == 20001

    def test_multilevel_oracle_interlaces(self, tmp_path):
        argv = ("oracle", "multilevel-wishart", "--m", "3", "--p", "2", "--draws", "500")
        assert _run(tmp_path, *argv) == 0
        doc = _json(tmp_path / "oracle_multilevel_wishart.json")
        assert doc["interlacing_violations"] == 0
        header = _rows(tmp_path / "oracle_multilevel_wishart.csv")[0]
        assert header == ["draw", "l1_1", "l2_1", "l2_2", "l3_1", "l3_2"]

    def test_simulate_laguerre(self, tmp_path):
        argv = ("simulate", "laguerre", "--m", "2", "--p", "2", "--t1", "0.1", "--dt", "0.01")
        assert _run(tmp_path, *argv, "--paths", "20", "--record-stride", "5") == 0
        rows = _rows(tmp_path / "simulate_laguerre.csv")
        assert rows[0] == ["path", "time", "failed", "l1_1", "l2_1", "l2_2"]
        assert len(rows) == 1 + 20 * 3
        doc = _json(tmp_path / "simulate_laguerre.json")
        assert doc["interlacing_violations"] == 0
        assert doc["ledger_decreases"] == 0
        assert (tmp_path / "simulate_laguerre_ecdf_final_coord1.csv").exists()

    def test_simulate_is_reproducible(self, tmp_path):
        argv = ("simulate", "jacobi", "--p", "3", "--q", "3", "--k", "2", "--t1", "0.05")
        argv += ("--dt", "0.01", "--paths", "30", "--seed", "11")
        assert _run(tmp_path, *argv) == 0
        first = {
            name: (tmp_path / name).read_bytes()
            for name in ("simulate_jacobi.csv", "simulate_jacobi.json")
        }
        assert _run(tmp_path, *argv) == 0
        for name, content in first.items():
            assert (tmp_path / name).read_bytes() == content

    def test_eigen_sde(self, tmp_path):
        argv = ("simulate", "eigen-sde", "--level", "jacobi", "--n", "2", "--p", "3", "--q", "3")
        assert _run(tmp_path, *argv, "--t1", "0.05", "--dt", "0.01", "--paths", "20") == 0
        doc = _json(tmp_path / "simulate_eigen_sde.json")
        assert doc["model"] == "eigen-jacobi"

    def test_sample_gibbs(self, tmp_path):
        argv = ("sample", "gibbs", "--model", "laguerre", "--m", "3", "--p", "2")
        assert _run(tmp_path, *argv, "--top", "1", "3", "--draws", "100") == 0
        assert _json(tmp_path / "sample_gibbs.json")["interlacing_violations"] == 0

    def test_check_identities(self, tmp_path):
        argv = ("check", "identities", "--suite", "harmonic", "--points", "5", "--max-n", "2")
        assert _run(tmp_path, *argv) == 0
        doc = _json(tmp_path / "check_identities.json")
        assert doc["passed"] is True
        assert _rows(tmp_path / "check_identities.csv")[0][0] == "identity_id"

    def test_check_da_integral(self, tmp_path):
        argv = ("check", "da-integral", "--n", "3", "--p", "2", "--y", "1", "4", "--mc", "50000")
        assert _run(tmp_path, *argv) == 0
        report = _json(tmp_path / "check_da_integral.json")["reports"][0]
        assert report["worst_point"]["target"] == pytest.approx(0.5)

    def test_rbm_corner_stats(self, tmp_path):
        argv = ("rbm", "corner-stats", "--rbm-type", "all", "--paths", "50", "--dt", "0.01")
        assert _run(tmp_path, *argv, "--horizon", "0.2") == 0
        rows = _rows(tmp_path / "rbm_corner_stats.csv")
        assert len(rows) == 1 + 6 * 3
        stats = _json(tmp_path / "rbm_corner_stats.json")["corner_stats"]
        assert sorted(stats) == ["A", "B1", "B2", "C1", "C2", "D"]

    def test_rbm_simulate_needs_single_type(self, tmp_path):
        assert _run(tmp_path, "rbm", "simulate", "--rbm-type", "all") == 1

    def test_compare(self, tmp_path):
        argv = ("compare", "--model", "laguerre", "--m", "2", "--n", "2", "--p", "2")
        argv += ("--t0", "0.5", "--t1", "0.6", "--dt", "0.01", "--paths", "200")
        assert _run(tmp_path, *argv) == 0
        doc = _json(tmp_path / "compare.json")
        assert [r["coordinate"] for r in doc["ks"]] == [0, 1]
        assert 0.0 <= doc["ks_trace"]["statistic"] <= 1.0

    def test_json_only(self, tmp_path):
        argv = ("oracle", "jacobi", "--n", "1", "--p", "2", "--q", "2", "--draws", "50")
        assert _run(tmp_path, *argv, "--formats", "json") == 0
        assert sorted(p.name for p in tmp_path.iterdir()) == ["oracle_jacobi.json"]

    def test_plots(self, tmp_path):
        pytest.importorskip("matplotlib")
        pytest.importorskip("seaborn")
        argv = ("oracle", "wishart", "--n", "1", "--p", "2", "--draws", "200", "--plots")
        assert _run(tmp_path, *argv) == 0
        assert (tmp_path / "oracle_wishart_ecdf_draws.png").exists()
