"""Reading and writing model files.

A model file is a JSON document with four top-level sections::

    {
      "model":         {"k": 3, "l": 3, "root": "S", "nodes": [...]},
      "criteria":      {"specs": [...], "estimates": {"R.1": {"C1": 13}}},
      "compatibility": [{"scope": "M", "default": 3, "entries": [["R.1", "P.1", 3]]}],
      "aggregation":   {"items": [{"da": "R.3", "cost": 2, "profit": 3}],
                        "budgets": [14, 15],
                        "compression": {"mode": "budget", "limit": null}}
    }

Only ``model`` is required.  Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .errors import MorphError
from .model import (COMPOSITE, GROUP, CompatibilityMatrix, DesignAlternative, Node,
                    SystemModel, require_valid)
from .ranking import CriterionSpec


@dataclass(frozen=True)
class CompressionSettings:
    mode: str = "budget"  # "budget" bounds total deletion cost, "count" bounds deletions
    limit: float | None = None


@dataclass(frozen=True)
class ModelFile:
    model: SystemModel
    criteria: tuple[CriterionSpec, ...] = ()
    estimates: dict[str, dict[str, float]] = field(default_factory=dict)
    items: dict[str, tuple[float, float]] = field(default_factory=dict)  # da -> (cost, profit)
    budgets: tuple[float, ...] = ()
    compression: CompressionSettings = CompressionSettings()


def _fail(path, msg):
    raise MorphError("PARSE_ERROR", f"{path}: {msg}")


def _obj(value, path, required=(), optional=()):
    if not isinstance(value, dict):
        _fail(path, f"expected an object, got {type(value).__name__}")
    unknown = set(value) - set(required) - set(optional)
    if unknown:
        _fail(path, f"unknown key(s) {sorted(unknown)}")
    missing = [k for k in required if k not in value]
    if missing:
        _fail(path, f"missing key(s) {missing}")
    return value


def _list(value, path):
    if not isinstance(value, list):
        _fail(path, f"expected a list, got {type(value).__name__}")
    return value


def _str(value, path):
    if not isinstance(value, str) or not value:
        _fail(path, "expected a nonempty string")
    return value


def _int(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    return value


def _num(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    return value


def _parse_model(doc) -> SystemModel:
    m = _obj(doc, "model", required=("k", "l", "root", "nodes"))
    nodes: dict[str, Node] = {}
    for i, raw in enumerate(_list(m["nodes"], "model.nodes")):
        path = f"model.nodes[{i}]"
        _obj(raw, path, required=("id",), optional=("label", "children", "alternatives"))
        nid = _str(raw["id"], f"{path}.id")
        if nid in nodes:
            _fail(path, f"duplicate node id {nid!r}")
        if "children" in raw and "alternatives" in raw:
            _fail(path, "a node has either children or alternatives, not both")
        label = _str(raw.get("label", nid), f"{path}.label")
        if "alternatives" in raw:
            alts = []
            for j, a in enumerate(_list(raw["alternatives"], f"{path}.alternatives")):
                apath = f"{path}.alternatives[{j}]"
                _obj(a, apath, required=("id", "priority"), optional=("name",))
                da_id = _str(a["id"], f"{apath}.id")
                alts.append(DesignAlternative(
                    da_id, nid, _str(a.get("name", da_id), f"{apath}.name"),
                    _int(a["priority"], f"{apath}.priority")))
            nodes[nid] = Node(nid, label, GROUP, (), tuple(alts))
        else:
            children = tuple(_str(c, f"{path}.children") for c in
                             _list(raw.get("children", []), f"{path}.children"))
            nodes[nid] = Node(nid, label, COMPOSITE, children)
    return SystemModel(_str(m["root"], "model.root"), nodes,
                       _int(m["k"], "model.k"), _int(m["l"], "model.l"))


def _parse_compat(doc) -> tuple[CompatibilityMatrix, ...]:
    out = []
    for i, raw in enumerate(_list(doc, "compatibility")):
        path = f"compatibility[{i}]"
        _obj(raw, path, required=("scope",), optional=("default", "entries"))
        entries: dict[tuple[str, str], int] = {}
        for j, e in enumerate(_list(raw.get("entries", []), f"{path}.entries")):
            epath = f"{path}.entries[{j}]"
            if not isinstance(e, list) or len(e) != 3:
                _fail(epath, "expected [da_a, da_b, value]")
            a, b = _str(e[0], epath), _str(e[1], epath)
            if (a, b) in entries:
                _fail(epath, f"pair ({a}, {b}) listed twice")
            entries[(a, b)] = _int(e[2], epath)
        default = raw.get("default")
        if default is not None:
            default = _int(default, f"{path}.default")
        out.append(CompatibilityMatrix(_str(raw["scope"], f"{path}.scope"), entries, default))
    return tuple(out)


def _parse_criteria(doc):
    _obj(doc, "criteria", optional=("specs", "estimates"))
    specs = []
    for i, raw in enumerate(_list(doc.get("specs", []), "criteria.specs")):
        path = f"criteria.specs[{i}]"
        _obj(raw, path, required=("id", "weight"), optional=("name",))
        cid = _str(raw["id"], f"{path}.id")
        specs.append(CriterionSpec(cid, _str(raw.get("name", cid), f"{path}.name"),
                                   _num(raw["weight"], f"{path}.weight")))
    known = {c.id for c in specs}
    estimates = {}
    raw_estimates = doc.get("estimates", {})
    if not isinstance(raw_estimates, dict):
        _fail("criteria.estimates", "expected an object")
    for da, row in raw_estimates.items():
        path = f"criteria.estimates.{da}"
        _obj(row, path, optional=known)
        estimates[da] = {cid: _num(v, f"{path}.{cid}") for cid, v in row.items()}
    return tuple(specs), estimates


def _parse_aggregation(doc):
    _obj(doc, "aggregation", optional=("items", "budgets", "compression"))
    items = {}
    for i, raw in enumerate(_list(doc.get("items", []), "aggregation.items")):
        path = f"aggregation.items[{i}]"
        _obj(raw, path, required=("da", "cost", "profit"))
        da = _str(raw["da"], f"{path}.da")
        if da in items:
            _fail(path, f"item {da!r} listed twice")
        cost = _num(raw["cost"], f"{path}.cost")
        if cost < 0:
            _fail(path, "cost must be nonnegative")
        items[da] = (cost, _num(raw["profit"], f"{path}.profit"))
    budgets = tuple(_num(b, "aggregation.budgets") for b in
                    _list(doc.get("budgets", []), "aggregation.budgets"))
    comp = _obj(doc.get("compression", {}), "aggregation.compression", optional=("mode", "limit"))
    mode = comp.get("mode", "budget")
    if mode not in ("budget", "count"):
        _fail("aggregation.compression.mode", f"expected 'budget' or 'count', got {mode!r}")
    limit = comp.get("limit")
    if limit is not None:
        _num(limit, "aggregation.compression.limit")
    return items, budgets, CompressionSettings(mode, limit)


def loads(text: str, validate: bool = True) -> ModelFile:
    if not text.strip():
        raise MorphError("PARSE_ERROR", "empty model file")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MorphError("PARSE_ERROR",
                         f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    _obj(doc, "<top>", required=("model",), optional=("criteria", "compatibility", "aggregation"))
    model = _parse_model(doc["model"])
    compat = _parse_compat(doc.get("compatibility", []))
    model = SystemModel(model.root, model.nodes, model.k, model.l, compat)
    criteria, estimates = _parse_criteria(doc.get("criteria", {}))
    items, budgets, compression = _parse_aggregation(doc.get("aggregation", {}))
    if validate:
        require_valid(model)
    return ModelFile(model, criteria, estimates, items, budgets, compression)


def parse_model(path, validate: bool = True) -> ModelFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MorphError("PARSE_ERROR", f"cannot read {path}: {exc.strerror}") from None
    return loads(text, validate=validate)


def sensor_model_path() -> Path:
    """Path of the shipped wireless-sensor dataset."""
    return Path(str(resources.files("morph") / "data" / "sensor.model"))


def load_sensor() -> ModelFile:
    return parse_model(sensor_model_path())


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------


def to_document(mf: ModelFile) -> dict[str, Any]:
    model = mf.model
    nodes = []
    for node in model.nodes.values():
        raw: dict[str, Any] = {"id": node.id, "label": node.label}
        if node.kind == GROUP:
            raw["alternatives"] = [{"id": a.id, "name": a.name, "priority": a.priority}
                                   for a in node.alternatives]
        else:
            raw["children"] = list(node.children)
        nodes.append(raw)
    doc: dict[str, Any] = {"model": {"k": model.k, "l": model.l, "root": model.root, "nodes": nodes}}
    if mf.criteria or mf.estimates:
        doc["criteria"] = {
            "specs": [{"id": c.id, "name": c.name, "weight": c.weight} for c in mf.criteria],
            "estimates": mf.estimates,
        }
    if model.compatibility:
        compat = []
        for m in model.compatibility:
            raw = {"scope": m.scope}
            if m.default is not None:
                raw["default"] = m.default
            if m.entries:
                raw["entries"] = [[a, b, w] for (a, b), w in m.entries.items()]
            compat.append(raw)
        doc["compatibility"] = compat
    if mf.items or mf.budgets or mf.compression != CompressionSettings():
        agg: dict[str, Any] = {
            "items": [{"da": d, "cost": c, "profit": p} for d, (c, p) in mf.items.items()],
            "budgets": list(mf.budgets),
        }
        if mf.compression != CompressionSettings():
            agg["compression"] = {"mode": mf.compression.mode, "limit": mf.compression.limit}
        doc["aggregation"] = agg
    return doc


def dumps(mf: ModelFile) -> str:
    return _pretty(to_document(mf)) + "\n"


def _pretty(value, indent=0) -> str:
    """JSON with one line per object member and flat lists kept inline."""
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        if all(not isinstance(v, (dict, list)) for v in value.values()) and len(value) <= 4:
            return json.dumps(value, ensure_ascii=False)
        inner = ",\n".join(f'{pad}  {json.dumps(k, ensure_ascii=False)}: {_pretty(v, indent + 1)}'
                           for k, v in value.items())
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(value, list):
        if all(not isinstance(v, (dict, list)) for v in value):
            return json.dumps(value, ensure_ascii=False)
        inner = ",\n".join(f"{pad}  {_pretty(v, indent + 1)}" for v in value)
        return "[\n" + inner + "\n" + pad + "]"
    return json.dumps(value, ensure_ascii=False)
