import io

import pytest

from pelagic.cli import main
from pelagic.experiments import ExperimentConfig
from pelagic.planner.io import read_plan
from test_planner import short_scenario


def run(*argv):
    out = io.StringIO()
    return main(list(argv), out), out.getvalue()


@pytest.fixture
def small_toml(tmp_path):
    cfg = ExperimentConfig(scenario=short_scenario(), p_max_dbm=(30.0,), energy_j=(5.0,),
                           interference_dbm=(-55.0,), output_dir=str(tmp_path / "results"))
    path = tmp_path / "small.toml"
    path.write_text(cfg.to_toml())
    return path


def test_help_exits_zero(capsys):
    assert run("--help")[0] == 0
    assert "plan" in capsys.readouterr().out


def test_usage_errors_exit_two():
    assert run()[0] == 2
    assert run("bogus")[0] == 2
    assert run("plan", "--init", "spiral")[0] == 2


def test_missing_config_exits_two(tmp_path):
    assert run("plan", "--config", str(tmp_path / "none.toml"))[0] == 2


def test_bad_config_exits_two(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[sweep]\nwhatever = 1\n")
    assert run("sweep", "--config", str(bad))[0] == 2


def test_plan_writes_csv(small_toml, tmp_path):
    code, text = run("plan", "--config", str(small_toml), "--out", str(tmp_path / "p"), "--energy-j", "3")
    assert code == 0 and "min_rate=" in text
    table = read_plan(tmp_path / "p" / "plan.csv")
    assert table.energy_used_j <= 3.0 + 1e-9


def test_plan_infeasible_exits_one(tmp_path):
    cfg = tmp_path / "slow.toml"
    cfg.write_text("[scenario.uav]\na_max_mps2 = 1.0\n")
    assert run("plan", "--config", str(cfg), "--out", str(tmp_path))[0] == 1


def test_sweep_uses_config_output_dir(small_toml, tmp_path):
    code, _ = run("sweep", "--config", str(small_toml))
    assert code == 0
    assert (tmp_path / "results" / "sweep.csv").read_text().count("\n") == 4
    assert (tmp_path / "results" / "sweep.dat").exists()


def test_endurance_table():
    code, text = run("endurance")
    assert code == 0
    feasible = [line.split()[0] for line in text.splitlines() if line.endswith(" feasible")]
    assert feasible == ["CW100"]
    assert "indeterminate" in text
    assert run("endurance", "--round-trip-km", "-5")[0] == 2


def test_heatmap_synthetic_is_seeded(tmp_path):
    assert run("heatmap", "--seed", "4", "--out", str(tmp_path / "a"))[0] == 0
    assert run("heatmap", "--seed", "4", "--out", str(tmp_path / "b"))[0] == 0
    assert (tmp_path / "a" / "heatmap.csv").read_bytes() == (tmp_path / "b" / "heatmap.csv").read_bytes()


def test_heatmap_bad_ais_exits_two(tmp_path):
    bad = tmp_path / "ais.csv"
    bad.write_text("nothing,useful\n1,2\n")
    assert run("heatmap", "--ais", str(bad), "--out", str(tmp_path))[0] == 2
    assert run("heatmap", "--ais", str(tmp_path / "missing.csv"), "--out", str(tmp_path))[0] == 2


def test_radiomap(tmp_path):
    code, text = run("radiomap", "--n-samples", "200", "--out", str(tmp_path))
    assert code == 0 and (tmp_path / "radiomap.csv").exists()
    assert "200 samples" in text
