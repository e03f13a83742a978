import pytest
from dataclasses import replace

from morph.errors import MorphError
from morph.model import (CompatibilityMatrix, build_model, compat, count_design_space,
                         validate_model)


def test_sensor_model_is_valid(sensor):
    report = validate_model(sensor)
    assert report.ok, report.errors
    assert report.warnings == ()


def test_single_group_root_is_valid():
    m = build_model("A", 3, 3, {"A": [("A.1", 1)]})
    assert validate_model(m).ok
    assert count_design_space(m) == 1


def test_asymmetric_entry_is_reported():
    m = build_model("S", 3, 3, {"A": [("a", 1)], "B": [("b", 1)]}, {"S": ["A", "B"]},
                    [CompatibilityMatrix("S", {("a", "b"): 2, ("b", "a"): 1})])
    assert validate_model(m).codes() == ["ASYMMETRIC_COMPAT"]


@pytest.mark.parametrize("sizes, expected", [((1,), 1), ((2, 3), 6), ((4, 3, 3, 4, 2, 3, 3, 2), 5184)])
def test_count_design_space(sizes, expected):
    groups = {f"G{i}": [(f"G{i}.{j}", 1) for j in range(n)] for i, n in enumerate(sizes)}
    if len(sizes) == 1:
        m = build_model("G0", 3, 3, groups)
    else:
        m = build_model("S", 3, 3, groups, {"S": list(groups)}, [CompatibilityMatrix("S", default=3)])
    assert count_design_space(m) == expected


def test_sensor_design_space(sensor):
    assert count_design_space(sensor) == 5184
    assert [len(sensor.alternatives(g)) for g in sensor.leaf_groups] == [4, 3, 3, 4, 2, 3, 3, 2]


@pytest.mark.parametrize("a, b, w", [("P.2", "D.1", 0), ("Y.3", "O.1", 3), ("R.1", "Q.1", 3),
                                     ("P.3", "D.2", 3), ("Y.1", "O.2", 2), ("R.2", "U.1", 3),
                                     ("Z.3", "O.2", 3)])
def test_sensor_compat(sensor, a, b, w):
    assert compat(sensor, a, b) == w
    assert compat(sensor, b, a) == w


def test_compat_symmetric_everywhere(sensor):
    das = [d.id for d in sensor.all_alternatives()]
    for a in das:
        for b in das:
            if sensor.da(a).group != sensor.da(b).group:
                assert sensor.compat(a, b) == sensor.compat(b, a)


def test_same_group_pair_is_unrelated(sensor):
    with pytest.raises(MorphError) as exc:
        sensor.compat("R.1", "R.2")
    assert exc.value.code == "UNRELATED_PAIR"


def test_missing_matrix_is_unrelated_and_invalid():
    m = build_model("S", 3, 3, {"A": [("a", 1)], "B": [("b", 1)]}, {"S": ["A", "B"]})
    with pytest.raises(MorphError) as exc:
        m.compat("a", "b")
    assert exc.value.code == "UNRELATED_PAIR"
    assert validate_model(m).codes() == ["MISSING_COMPAT"]


def test_structural_errors():
    m = build_model("S", 3, 3, {"A": [("a", 5)], "B": []}, {"S": ["A", "B", "X"], "T": []},
                    [CompatibilityMatrix("S", default=3)])
    codes = set(validate_model(m).codes())
    assert {"UNKNOWN_CHILD", "PRIORITY_OUT_OF_RANGE", "EMPTY_GROUP", "EMPTY_COMPOSITE",
            "UNREACHABLE_NODE"} <= codes


def test_cycle_and_multiple_parents():
    m = build_model("S", 3, 3, {"A": [("a", 1)]}, {"S": ["T", "A"], "T": ["U"], "U": ["T"]})
    codes = set(validate_model(m).codes())
    assert "MULTIPLE_PARENTS" in codes or "CYCLE" in codes


def test_entry_in_wrong_scope(sensor):
    bad = tuple(
        replace(mx, entries={**mx.entries, ("R.1", "Y.1"): 2}) if mx.scope == "M" else mx
        for mx in sensor.compatibility
    )
    report = validate_model(replace(sensor, compatibility=bad))
    assert report.codes() == ["COMPAT_SCOPE_MISMATCH"]


def test_compat_out_of_range(sensor):
    bad = tuple(replace(mx, default=7) if mx.scope == "H" else mx for mx in sensor.compatibility)
    assert validate_model(replace(sensor, compatibility=bad)).codes() == ["COMPAT_OUT_OF_RANGE"]


def test_validation_deterministic_and_idempotent(sensor):
    m = build_model("S", 3, 3, {"A": [("a", 9)], "B": [("b", 1)]}, {"S": ["A", "B"]},
                    [CompatibilityMatrix("S", {("a", "b"): 2, ("b", "a"): 1})])
    assert validate_model(m) == validate_model(m)
    assert validate_model(sensor) == validate_model(sensor)


def test_with_priorities(sensor):
    changed = sensor.with_priorities({"R.1": 1})
    assert changed.da("R.1").priority == 1
    assert sensor.da("R.1").priority == 3
