import json

import numpy as np
import pytest

from ehvi_quad.cli import main, parse_nodes
from ehvi_quad.experiment import ExperimentConfig, run_compare, run_sweep
from ehvi_quad.errors import ConfigError

SMALL = ["--trials", "6", "--mc-samples", "500", "--gh-nodes", "3,4,5"]


def test_parse_nodes():
    assert parse_nodes("3-6") == (3, 4, 5, 6)
    assert parse_nodes("5,10,15") == (5, 10, 15)
    assert parse_nodes("3-4,9") == (3, 4, 9)


def test_compare_json(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["compare", *SMALL, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc) >= {"config", "records", "summaries"}
    assert len(doc["records"]) == 6
    assert set(doc["records"][0]["values"]) == {"MC", "GH3", "GH4", "GH5", "EXACT2D"}
    assert doc["config"]["prune"] == 0.2
    assert "tau(GH5, EXACT2D)" in capsys.readouterr().out


def test_compare_csv_layout(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["compare", *SMALL, "--format", "csv", "--out", str(out)]) == 0
    header = out.read_text().splitlines()[0].split(",")
    assert header[:7] == ["trial", "mean_1", "mean_2", "cov_11", "cov_12", "cov_21", "cov_22"]
    assert header[7:9] == ["MC", "MC_evals"]
    assert header[-2:] == ["EXACT2D", "EXACT2D_evals"]
    assert len(out.read_text().splitlines()) == 7
    summary = (tmp_path / "r.summary.csv").read_text().splitlines()
    assert summary[0] == "a,b,tau,p_value,n"


def test_timings_written_separately(tmp_path):
    out, timings = tmp_path / "r.json", tmp_path / "t.csv"
    assert main(["compare", *SMALL, "--out", str(out), "--timings", str(timings)]) == 0
    rows = timings.read_text().splitlines()
    assert rows[0] == "trial,MC,GH3,GH4,GH5,EXACT2D"
    assert len(rows) == 7
    assert "timing" not in out.read_text()


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"trials": 4, "mc_samples": 300, "gh_nodes": [3, 5], "seed": 9}))
    out = tmp_path / "r.json"
    assert main(["compare", "--config", str(cfg), "--trials", "3", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["records"]) == 3
    assert doc["config"]["seed"] == 9
    assert doc["config"]["gh_nodes"] == [3, 5]


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"trails": 4}))
    assert main(["compare", "--config", str(cfg)]) == 2
    assert "unknown config keys" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["compare", "--trials", "1"],
    ["compare", "--prune", "1.0"],
    ["compare", "--shape", "spiral"],
    ["compare", "--front", "/nonexistent/front.csv"],
    ["sweep", "--gh-nodes", "5", "--trials", "3"],
])
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_numeric_failure_exit_3(tmp_path, capsys):
    front = tmp_path / "f.csv"
    front.write_text("0,1\n1,0\n")
    assert main(["ehvi", "--front", str(front), "--mean", "[0, 0]", "--cov", "[[1, 2], [2, 1]]"]) == 3
    assert "error:" in capsys.readouterr().err


def test_sweep_rows(tmp_path, capsys):
    out = tmp_path / "s.json"
    assert main(["sweep", "--trials", "5", "--mc-samples", "300", "--gh-nodes", "4,5,15", "--out", str(out)]) == 0
    sweep = json.loads(out.read_text())["sweep"]
    by = {row["method"]: row for row in sweep}
    assert by["GH4"]["parity"] == "even" and by["GH5"]["parity"] == "odd"
    assert by["GH15"]["nodes"] == 180
    assert by["GH15"]["monotone_ok"] is not None


def test_correlated_subcommand(tmp_path):
    out = tmp_path / "c.json"
    assert main(["correlated", *SMALL, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["kind"] == "CORRELATED"
    assert "DIAG_EXACT2D" in doc["records"][0]["values"]
    assert "Wishart" in doc["config"]["covariance_generator"]


def test_m3_uses_reference_baseline(tmp_path):
    out = tmp_path / "m3.json"
    argv = ["compare", "--m", "3", "--front-size", "15", "--trials", "3", "--mc-samples", "300",
            "--gh-nodes", "3", "--out", str(out)]
    assert main(argv) == 0
    assert "REFERENCE" in json.loads(out.read_text())["records"][0]["values"]


def test_gh_grid_fig1(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["gh-grid", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x1,x2,weight"
    assert len(lines) == 1 + 51


def test_gh_grid_n1_stdout(capsys):
    assert main(["gh-grid", "--mean", "[1.5, -2]", "--cov", "[[1, 0], [0, 1]]", "--gh-nodes", "1", "--prune", "0"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1:] == ["1.5,-2.0,1.0"]


def test_gh_grid_bad_path_leaves_no_file(tmp_path, capsys):
    target = tmp_path / "missing" / "g.csv"
    assert main(["gh-grid", "--out", str(target)]) == 2
    assert not target.exists()
    assert not (tmp_path / "missing").exists()


def test_ehvi_subcommand(tmp_path, capsys):
    front = tmp_path / "f.csv"
    front.write_text("1,3\n2,2\n3,1\n")
    dens = tmp_path / "d.json"
    dens.write_text(json.dumps({"mean": [0.5, 0.5], "cov": [[0.01, 0], [0, 0.01]]}))
    argv = ["ehvi", "--front", str(front), "--reference", "[4, 4]", "--density", str(dens),
            "--methods", "mc,gh,exact,reference"]
    assert main(argv) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["exact"]["value"] == pytest.approx(doc["reference"]["value"], rel=1e-3)
    assert doc["gh"]["evaluations"] == 180
    assert doc["mc"]["mc_std_error"] > 0


def test_ehvi_needs_density(tmp_path):
    front = tmp_path / "f.csv"
    front.write_text("1,3\n3,1\n")
    assert main(["ehvi", "--front", str(front)]) == 2


def test_threads_match_serial(monkeypatch):
    config = ExperimentConfig(trials=8, mc_samples=400, gh_nodes=(3, 8), seed=4)
    serial = run_compare(config)
    monkeypatch.setenv("EHVI_QUAD_THREADS", "4")
    parallel = run_compare(ExperimentConfig(trials=8, mc_samples=400, gh_nodes=(3, 8), seed=4))
    assert [r.values for r in serial.records] == [r.values for r in parallel.records]


def test_trial_streams_are_independent():
    # trial i depends only on seed and i, so a shorter run is a prefix
    short = run_compare(ExperimentConfig(trials=3, mc_samples=300, gh_nodes=(5,), seed=2))
    long = run_compare(ExperimentConfig(trials=6, mc_samples=300, gh_nodes=(5,), seed=2))
    assert [r.values for r in short.records] == [r.values for r in long.records[:3]]


def test_experiment_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(gh_nodes=(0, 3))
    with pytest.raises(ConfigError):
        ExperimentConfig(format="xml")
    assert ExperimentConfig(m=4).baseline_method() is None
    assert ExperimentConfig(kind="CORRELATED").baseline_method() == "DIAG_EXACT2D"


def test_sweep_needs_two_node_counts():
    with pytest.raises(ConfigError):
        run_sweep(ExperimentConfig(gh_nodes=(5,)))


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
