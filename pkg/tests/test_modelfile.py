import json

import pytest

from morph.errors import MorphError
from morph.modelfile import dumps, load_sensor, loads, parse_model, sensor_model_path

SMALL = {
    "model": {"k": 3, "l": 3, "root": "S", "nodes": [
        {"id": "S", "label": "System", "children": ["A", "B"]},
        {"id": "A", "label": "A", "alternatives": [{"id": "A.1", "name": "a1", "priority": 1}]},
        {"id": "B", "label": "B", "alternatives": [{"id": "B.1", "name": "b1", "priority": 2}]},
    ]},
    "compatibility": [{"scope": "S", "entries": [["A.1", "B.1", 2]]}],
}


def code_of(text):
    with pytest.raises(MorphError) as exc:
        loads(text)
    return exc.value


def test_small_document_loads():
    mf = loads(json.dumps(SMALL))
    assert mf.model.compat("A.1", "B.1") == 2
    assert mf.items == {} and mf.budgets == ()


@pytest.mark.parametrize("text", ["", "   \n"])
def test_empty_file(text):
    assert code_of(text).code == "PARSE_ERROR"


def test_syntax_error_reports_position():
    err = code_of('{\n  "model": {\n    "k": 3,,\n')
    assert err.code == "PARSE_ERROR"
    assert "line 3" in err.message


def test_unknown_key_rejected():
    doc = dict(SMALL, extras=1)
    assert code_of(json.dumps(doc)).code == "PARSE_ERROR"


def test_wrong_type_rejected():
    doc = json.loads(json.dumps(SMALL))
    doc["model"]["k"] = "three"
    assert code_of(json.dumps(doc)).code == "PARSE_ERROR"


def test_asymmetric_entry_fails_validation():
    doc = json.loads(json.dumps(SMALL))
    doc["compatibility"][0]["entries"].append(["B.1", "A.1", 1])
    err = code_of(json.dumps(doc))
    assert err.code == "VALIDATION_ERROR"
    assert "ASYMMETRIC_COMPAT" in err.detail.codes()


def test_unvalidated_load_keeps_bad_model():
    doc = json.loads(json.dumps(SMALL))
    doc["compatibility"] = []
    mf = loads(json.dumps(doc), validate=False)
    assert mf.model.root == "S"


def test_missing_file(tmp_path):
    with pytest.raises(MorphError) as exc:
        parse_model(tmp_path / "nope.model")
    assert exc.value.code == "PARSE_ERROR"


def test_sensor_dataset_contents():
    mf = load_sensor()
    assert len(mf.model.leaf_groups) == 8
    assert len(mf.model.all_alternatives()) == 24
    assert len(mf.criteria) == 7
    assert mf.budgets == (14, 15)
    assert mf.items["R.3"] == (2, 3)


def test_round_trip():
    mf = load_sensor()
    again = loads(dumps(mf))
    assert again == mf
    assert dumps(again) == dumps(mf)
    assert sensor_model_path().read_text(encoding="utf-8") == dumps(mf)
