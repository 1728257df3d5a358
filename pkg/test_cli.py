# test_cli.py - Command-line surface: exit statuses, determinism, sweep resume, compare
import json

import pytest

from app import main
from baselines.grid import PointSummary, summary_path
from cli.commands import EXIT_CONFIG, EXIT_OK, EXIT_SIMULATION
from cli.dependencies import apply_overrides, load_config
from core.domain import GlobalParams
from core.errors import ConfigParse, ScenarioInvalid
from core.utils import save_json
from conftest import TRIVIAL_CONVERGENCE


def test_run_writes_report(tiny_raw, write_config, tmp_path):
    path = write_config(tiny_raw())
    out = tmp_path / "out"
    assert main(["run", "--config", str(path), "--out", str(out)]) == EXIT_OK
    lines = (out / "report.jsonl").read_text(encoding="utf-8").splitlines()
    assert json.loads(lines[0])["kind"] == "header"
    assert json.loads(lines[-1])["kind"] == "summary"
    assert (out / "rounds.csv").exists()


def test_off_lattice_batch_is_a_config_error(tiny_raw, write_config, tmp_path, capsys):
    path = write_config(tiny_raw(strategy={"params": [3, 1, 5]}))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "out")]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "strategy.params" in err
    assert "B=3" in err
    assert not (tmp_path / "out").exists()


def test_k_above_fleet_is_a_config_error(tiny_raw, write_config, tmp_path, capsys):
    path = write_config(tiny_raw(scenario={"fleet": {"H": 1, "M": 1, "L": 1}}))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "out")]) == EXIT_CONFIG
    assert "strategy.params" in capsys.readouterr().err


def test_small_fleet_rejected_for_adaptive_strategies(tiny_raw, write_config, tmp_path, capsys):
    path = write_config(tiny_raw(scenario={"fleet": {"H": 1, "M": 1, "L": 1}}))
    code = main(["run", "--config", str(path), "--strategy", "fedgpo", "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG
    assert "scenario.fleet" in capsys.readouterr().err


def test_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "out")]) == EXIT_CONFIG


def test_missing_config_file(tmp_path):
    assert main(["run", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG


def test_negative_seed(tiny_raw, write_config):
    assert main(["run", "--config", str(write_config(tiny_raw())), "--seed", "-1"]) == EXIT_CONFIG


def test_same_seed_gives_identical_bytes(tiny_raw, write_config, tmp_path):
    path = write_config(tiny_raw(strategy={"name": "random", "params": None}))
    for name in ("a", "b"):
        assert main(["run", "--config", str(path), "--seed", "42", "--out", str(tmp_path / name)]) == EXIT_OK
    a = (tmp_path / "a" / "report.jsonl").read_bytes()
    b = (tmp_path / "b" / "report.jsonl").read_bytes()
    assert a == b
    assert json.loads(a.splitlines()[0])["config"]["scenario"]["seed"] == 42


def test_overrides_win_over_the_document(tiny_raw, write_config):
    config = load_config(write_config(tiny_raw()), seed=9, strategy="random", max_rounds=2)
    assert config.scenario.seed == 9
    assert config.scenario.max_rounds == 2
    assert config.strategy.name == "random"


def test_override_of_non_object_section():
    with pytest.raises(ConfigParse):
        apply_overrides({"scenario": 5}, seed=1)


def test_unknown_key_rejected(tiny_raw, write_config):
    with pytest.raises(ScenarioInvalid) as err:
        load_config(write_config(tiny_raw(scenario={"colour": "red"})))
    assert "scenario.colour" in str(err.value)


def _sweep_document(tiny_raw):
    return tiny_raw(
        scenario={"convergence": TRIVIAL_CONVERGENCE},
        sweep={"lattice": [[4, 1, 5], [8, 1, 5]], "budget_rounds": 2},
    )


def test_sweep_writes_every_point(tiny_raw, write_config, tmp_path):
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(write_config(_sweep_document(tiny_raw))), "--out", str(out)]) == EXIT_OK
    assert len(list((out / "sweep").glob("point_*.json"))) == 2
    result = json.loads((out / "sweep_result.json").read_text(encoding="utf-8"))
    assert len(result["summaries"]) == 2
    assert result["best"] in ([4, 1, 5], [8, 1, 5])


def test_sweep_resumes_from_existing_summaries(tiny_raw, write_config, tmp_path):
    out = tmp_path / "out"
    done = GlobalParams(8, 1, 5)
    save_json(PointSummary(done, 1, 1, 1e-9, 1e9, 90.0).to_dict(), summary_path(out / "sweep", done))
    assert main(["sweep", "--config", str(write_config(_sweep_document(tiny_raw))), "--out", str(out)]) == EXIT_OK
    result = json.loads((out / "sweep_result.json").read_text(encoding="utf-8"))
    assert result["best"] == [8, 1, 5]


def test_compare_writes_one_row_per_strategy(tiny_raw, write_config, tmp_path):
    document = tiny_raw(compare={"strategies": ["fixed", "random"], "anchor": "fixed"})
    out = tmp_path / "out"
    assert main(["compare", "--config", str(write_config(document)), "--out", str(out)]) == EXIT_OK
    rows = json.loads((out / "comparison.json").read_text(encoding="utf-8"))
    assert [row["strategy"] for row in rows] == ["fixed", "random"]
    csv_lines = (out / "comparison.csv").read_text(encoding="utf-8").splitlines()
    assert len(csv_lines) == 3
    assert (out / "fixed" / "report.jsonl").exists()
    assert (out / "random" / "report.jsonl").exists()


def test_compare_with_unknown_anchor_fails(tiny_raw, write_config, tmp_path):
    document = tiny_raw(compare={"strategies": ["fixed", "random"], "anchor": "ga"})
    assert main(["compare", "--config", str(write_config(document)), "--out", str(tmp_path / "out")]) == EXIT_SIMULATION


def test_compare_fixed_without_params_is_a_config_error(tiny_raw, write_config, tmp_path, capsys):
    document = tiny_raw(strategy={"name": "random", "params": None},
                        compare={"strategies": ["fixed", "random"], "anchor": "random"})
    code = main(["compare", "--config", str(write_config(document)), "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG
    assert "strategy.params" in capsys.readouterr().err


def test_examples_are_valid_configs(tmp_path):
    assert main(["examples", "--out", str(tmp_path)]) == EXIT_OK
    names = sorted(p.name for p in tmp_path.glob("*.json"))
    assert names == ["desk.json", "large-dirichlet.json", "large-iid.json"]
    for path in tmp_path.glob("*.json"):
        load_config(path)
