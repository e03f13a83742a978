import json

import pytest

from morph.cli import run
from morph.modelfile import load_sensor, sensor_model_path
from morph.model import CompatibilityMatrix
from morph.modelfile import dumps

SENSOR = str(sensor_model_path())


def machine(capsys, *argv):
    code = run([*argv, "--format", "machine"])
    return code, json.loads(capsys.readouterr().out)


def test_validate(capsys):
    assert run(["validate", SENSOR]) == 0
    assert "valid" in capsys.readouterr().out


def test_synth_front(capsys):
    code, doc = machine(capsys, "synth", SENSOR)
    assert code == 0
    assert len(doc["synthesis"]["root"]) == 8
    assert "aggregation" not in doc or doc["aggregation"] is None


def test_text_rendering(capsys):
    assert run(["synth", SENSOR]) == 0
    out = capsys.readouterr().out
    assert "(3; 3,1,0)" in out and "(3; 1,1,0)" in out


def test_pipeline_extension(capsys):
    code, doc = machine(capsys, "pipeline", SENSOR, "--budget", "14", "--strategy", "extend")
    assert code == 0
    [res] = doc["aggregation"]["results"]
    assert res["mcp"]["picks"] == ["R.3", "Z.1", "Y.2", "O.1"]
    assert (res["mcp"]["total_cost"], res["mcp"]["total_profit"]) == (14, 12)


def test_infeasible_budget_exits_2(capsys):
    code = run(["aggregate", SENSOR, "--budget", "13", "--strategy", "extend"])
    assert code == 2
    assert "infeasible" in capsys.readouterr().err


def test_rank(capsys):
    code, doc = machine(capsys, "rank", SENSOR, "--priorities", "rank")
    assert code == 0
    assert "ranking" in doc


def test_empty_front_exits_2(tmp_path, capsys):
    mf = load_sensor()
    model = mf.model
    blocked = tuple(CompatibilityMatrix(m.scope, {}, 0) if m.scope == "W" else m
                    for m in model.compatibility)
    bad = type(mf)(type(model)(model.root, model.nodes, model.k, model.l, blocked),
                   mf.criteria, mf.estimates, mf.items, mf.budgets, mf.compression)
    path = tmp_path / "blocked.model"
    path.write_text(dumps(bad), encoding="utf-8")
    assert run(["synth", str(path)]) == 2
    assert "no admissible compositions" in capsys.readouterr().out


def test_solutions_file(tmp_path, capsys):
    rows = [{"R": "R.3", "P": "P.3", "D": "D.2", "Q": "Q.4", "U": "U.1", "Z": "Z.1", "Y": "Y.2", "O": "O.1"},
            {"R": "R.4", "P": "P.3", "D": "D.2", "Q": "Q.4", "U": "U.1", "Z": "Z.1", "Y": "Y.3", "O": "O.1"}]
    path = tmp_path / "sols.json"
    path.write_text(json.dumps(rows))
    code, doc = machine(capsys, "aggregate", SENSOR, "--solutions", str(path), "--strategy", "median")
    assert code == 0
    assert doc["aggregation"]["kernel"]["R"] == []
    assert doc["aggregation"]["kernel"]["O"] == ["O.1"]


def test_solutions_only_for_aggregate(tmp_path):
    path = tmp_path / "sols.json"
    path.write_text("[]")
    assert run(["synth", SENSOR, "--solutions", str(path)]) == 1


def test_bad_model_exits_1(tmp_path):
    path = tmp_path / "broken.model"
    path.write_text("{ nope")
    assert run(["synth", str(path)]) == 1
    assert run(["validate", str(path)]) == 1


def test_out_file(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert run(["pipeline", SENSOR, "--format", "machine", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["schema_version"] == 1


def test_unknown_option_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        run(["synth", SENSOR, "--nope"])
    assert exc.value.code == 1
