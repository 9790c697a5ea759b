import csv
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lowrank_aqc import evolution
from lowrank_aqc.cli import EXIT_FAIL, EXIT_NUMERICAL, EXIT_PASS, EXIT_USAGE, main
from lowrank_aqc.config import EXPERIMENTS, ConfigError, ExperimentConfig


def write_config(path, **fields):
    path.write_text(json.dumps(fields), encoding="utf-8")
    return str(path)


def artifacts(out):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "config.json"}


def test_theorem2_passes(tmp_path):
    assert main(["theorem2", "--out", str(tmp_path)]) == EXIT_PASS
    rows = list(csv.DictReader(open(tmp_path / "results.csv")))
    assert len(rows) == 3
    assert all(float(r["pf_norm"]) >= 0.2 for r in rows)
    assert (tmp_path / "plot.svg").exists()


def test_theorem3_summary_line(tmp_path, capsys):
    assert main(["theorem3", "--out", str(tmp_path)]) == EXIT_PASS
    assert "estimate within 10/N^2 of 4e-4: PASS" in (tmp_path / "summary.txt").read_text().splitlines()
    assert "estimate within 10/N^2 of 4e-4: PASS" in capsys.readouterr().out


def test_figure1_artifacts(tmp_path):
    assert main(["figure1", "--out", str(tmp_path)]) == EXIT_PASS
    svg = (tmp_path / "plot.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<clipPath") == 3
    assert len(list(csv.reader(open(tmp_path / "crossings.csv")))) == 3
    header = next(csv.reader(open(tmp_path / "results.csv")))
    assert header[0] == "t" and header[-2:] == ["g", "Delta"]


def test_criterion_failure_exit_code(tmp_path):
    # far beyond tau_- every schedule is free to leave the initial state
    cfg = write_config(tmp_path / "c.json", experiment="theorem1", tau=1e5,
                       params={"schedules": [{"kind": "diabatic-jump", "alpha": 0.5}]})
    assert main(["theorem1", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_FAIL


@pytest.mark.parametrize("fields", [
    {"experiment": "theorem1", "bogus": 1},
    {"experiment": "theorem1", "tol": 1e-3},
    {"experiment": "theorem1", "schema_version": 99},
    {"experiment": "theorem2"},
    {"experiment": "sweep", "grid": {"tau": [1.0], "N": [100], "m": [1]}},
    {"experiment": "sweep", "grid": {"tau": [1.0] * 1001, "N": [100] * 1000}},
    {"experiment": "sweep", "grid": {"colour": [1]}},
])
def test_usage_errors(tmp_path, fields):
    cfg = write_config(tmp_path / "c.json", **fields)
    assert main(["theorem1", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_USAGE
    assert not (tmp_path / "o").exists()


def test_bad_arguments():
    assert main(["no-such-experiment"]) == EXIT_USAGE
    assert main(["theorem1", "--tol", "abc"]) == EXIT_USAGE
    assert main(["theorem1", "--tol", "1e-3"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE


def test_invalid_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    assert main(["theorem1", "--config", str(p)]) == EXIT_USAGE


def test_numerical_failure_exit_code(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(evolution, "H_MIN", 0.5)
    cfg = write_config(tmp_path / "c.json", experiment="theorem1", tau=1e3, tol=1e-12,
                       params={"schedules": [{"kind": "linear"}]})
    assert main(["theorem1", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_NUMERICAL
    assert "theorem1: numerical failure" in capsys.readouterr().err


@pytest.mark.parametrize("name", EXPERIMENTS)
def test_default_config_round_trip(name, tmp_path):
    cfg = ExperimentConfig.default(name)
    cfg.save(tmp_path / "c.json")
    again = ExperimentConfig.load(tmp_path / "c.json")
    assert again == cfg
    assert again.dumps() == cfg.dumps()


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(EXPERIMENTS), st.integers(0, 2**31), st.floats(1e-12, 1e-6), st.integers(1, 8),
       st.lists(st.floats(0, 1e4), max_size=5))
def test_config_round_trip_property(name, seed, tol, workers, taus):
    cfg = ExperimentConfig.default(name)
    cfg.seed, cfg.tol, cfg.workers, cfg.tau_grid = seed, tol, workers, taus
    assert ExperimentConfig.from_dict(json.loads(cfg.dumps())) == cfg


def test_config_errors_name_the_field():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({"experiment": "sweep", "workers": 0})
    assert info.value.field == "workers"
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({"experiment": "sweep", "grid": {"tau": [1.0] * 1001, "N": [10] * 1000}})
    assert info.value.field == "grid" and "exceeds" in str(info.value)


def test_empty_grid_gives_header_only_csv(tmp_path):
    cfg = write_config(tmp_path / "c.json", experiment="sweep", grid={})
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_PASS
    assert (tmp_path / "o" / "results.csv").read_text() == "k,overlap,pf_norm,qf_norm,norm_drift\n"


def test_min_gap_sweep_slope(tmp_path):
    cfg = write_config(tmp_path / "c.json", experiment="sweep", grid={"N": [100, 1000, 10000, 100000]},
                       params={"quantity": "min-gap"})
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_PASS
    assert "PASS" in (tmp_path / "o" / "summary.txt").read_text()


def test_two_axis_sweep_row_order(tmp_path):
    cfg = write_config(tmp_path / "c.json", experiment="sweep", grid={"N": [100, 400], "tau": [1.0, 5.0, 20.0]})
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_PASS
    rows = list(csv.reader(open(tmp_path / "o" / "results.csv")))
    assert rows[0][:2] == ["N", "tau"]
    assert [(r[0], r[1]) for r in rows[1:]] == [(n, t) for n in ("100", "400") for t in ("1.0", "5.0", "20.0")]


@pytest.mark.parametrize("name,fields", [
    ("sweep", {"grid": {"tau": [1.0, 10.0, 50.0], "m": [1, 2]}}),
    ("oracle-equivalence", {"params": {"n_instances": 6, "max_N": 24, "max_rank": 3}}),
])
def test_workers_do_not_change_output(tmp_path, name, fields):
    cfg = write_config(tmp_path / "c.json", experiment=name, **fields)
    assert main([name, "--config", cfg, "--out", str(tmp_path / "w1"), "--workers", "1"]) == EXIT_PASS
    assert main([name, "--config", cfg, "--out", str(tmp_path / "w2"), "--workers", "2"]) == EXIT_PASS
    assert artifacts(tmp_path / "w1") == artifacts(tmp_path / "w2")


@pytest.mark.parametrize("name", ["theorem1", "theorem2", "landau-zener"])
def test_reruns_are_byte_identical(tmp_path, name):
    assert main([name, "--out", str(tmp_path / "a")]) == EXIT_PASS
    assert main([name, "--out", str(tmp_path / "b")]) == EXIT_PASS
    assert artifacts(tmp_path / "a") == artifacts(tmp_path / "b")


def test_seed_changes_random_schedules(tmp_path):
    assert main(["theorem1", "--out", str(tmp_path / "a"), "--seed", "1"]) == EXIT_PASS
    assert main(["theorem1", "--out", str(tmp_path / "b"), "--seed", "2"]) == EXIT_PASS
    assert artifacts(tmp_path / "a")["results.csv"] != artifacts(tmp_path / "b")["results.csv"]
    saved = json.loads((tmp_path / "a" / "config.json").read_text())
    assert saved["seed"] == 1 and saved["schema_version"] == 1


def test_module_entry_point():
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "lowrank_aqc", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "theorem4" in r.stdout
