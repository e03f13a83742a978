"""Pipeline orchestration and report rendering."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import aggregation as agg
from .errors import INFEASIBLE_CODES, MorphError
from .model import count_design_space
from .modelfile import ModelFile
from .ranking import Thresholds, rank_model
from .synthesis import UNITS, CompositeSolution, SynthesisResult, run_synthesis

SCHEMA_VERSION = 1
STRATEGIES = ("extend", "compress", "median")


@dataclass
class Config:
    budgets: tuple[float, ...] = ()
    mcp: str = "greedy"
    strategies: tuple[str, ...] = STRATEGIES
    priorities: str = "file"
    p: float = 0.5
    q: float = 1.0
    propagate_layers: int = 1
    quality: str = UNITS
    compress_mode: str | None = None
    compress_limit: float | None = None

    def echo(self) -> dict[str, Any]:
        return {
            "budgets": [_num(b) for b in self.budgets],
            "mcp": self.mcp,
            "strategies": list(self.strategies),
            "priorities": self.priorities,
            "thresholds": {"p": self.p, "q": self.q},
            "propagate_layers": self.propagate_layers,
            "quality": self.quality,
            "compress_mode": self.compress_mode,
            "compress_limit": self.compress_limit,
        }


@dataclass
class RunReport:
    command: str
    source: str
    config: dict[str, Any]
    model: dict[str, Any]
    ranking: dict[str, Any] | None = None
    synthesis: dict[str, Any] | None = None
    aggregation: dict[str, Any] | None = None
    timing: dict[str, float] = field(default_factory=dict)
    infeasible: bool = False

    def to_machine(self, with_timing: bool = False) -> dict[str, Any]:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "source": self.source,
            "config": self.config,
            "model": self.model,
        }
        for key in ("ranking", "synthesis", "aggregation"):
            if getattr(self, key) is not None:
                doc[key] = getattr(self, key)
        if with_timing:
            doc["timing"] = {k: round(v, 6) for k, v in self.timing.items()}
        return doc


def _num(x):
    if isinstance(x, float) and x.is_integer():
        return int(x)
    return x


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def apply_ranking(mf: ModelFile, cfg: Config) -> tuple[ModelFile, dict[str, Any]]:
    if not mf.criteria:
        raise MorphError("NO_ACTIVE_CRITERIA", "model file has no criteria section to rank with")
    computed = rank_model(mf.model, mf.criteria, mf.estimates, Thresholds(cfg.p, cfg.q))
    groups = {}
    for gid in mf.model.leaf_groups:
        groups[gid] = {
            da.id: {"computed": computed[da.id], "file": da.priority}
            for da in mf.model.nodes[gid].alternatives
        }
    model = mf.model.with_priorities(computed)
    section = {"thresholds": {"p": cfg.p, "q": cfg.q}, "groups": groups}
    used = ModelFile(model, mf.criteria, mf.estimates, mf.items, mf.budgets, mf.compression)
    return used, section


def _solution_doc(sol: CompositeSolution, priority: int | None = None) -> dict[str, Any]:
    doc = {
        "name": sol.name,
        "selection": dict(sol.selection),
        "leaf_profile": dict(sol.leaf_profile),
        "quality": {"w": sol.quality.w, "n": list(sol.quality.n), "text": str(sol.quality)},
    }
    if priority is not None:
        doc["priority"] = priority
    return doc


def synthesis_section(mf: ModelFile, result: SynthesisResult, cfg: Config) -> dict[str, Any]:
    model = mf.model
    nodes = []
    order = [model.root] if model.node(model.root).is_group else model.internal_postorder()
    for nid in order:
        if nid not in result.fronts:
            continue
        prio = {d.solution.index: d.priority for d in result.propagated.get(nid, [])}
        nodes.append({
            "node": nid,
            "label": model.node(nid).label,
            "children": list(model.node(nid).children),
            "admissible": result.candidates.get(nid, 0),
            "front": [_solution_doc(s, prio.get(s.index)) for s in result.fronts[nid]],
            "propagated": [d.id for d in result.propagated.get(nid, [])],
        })
    return {
        "quality": cfg.quality,
        "propagate_layers": cfg.propagate_layers,
        "nodes": nodes,
        "failed_node": result.failed_node,
        "root": [_solution_doc(s) for s in result.root],
    }


def _profile_doc(p: agg.SelectionProfile) -> dict[str, list[str]]:
    return {g: list(das) for g, das in p.choices}


def _mcp_doc(sol: agg.McpSolution | None) -> dict[str, Any] | None:
    if sol is None:
        return None
    return {"picks": list(sol.das), "total_cost": sol.total_cost,
            "total_profit": sol.total_profit, "method": sol.method}


def aggregation_section(mf: ModelFile, names: Sequence[str], profiles: Sequence[agg.SelectionProfile],
                        cfg: Config) -> tuple[dict[str, Any], bool]:
    model = mf.model
    order = {d.id: i for i, d in enumerate(model.all_alternatives())}
    kern = agg.kernel(profiles, order)
    sup = agg.superstructure(profiles, order)
    results = []
    infeasible = False

    def attempt(entry, fn):
        nonlocal infeasible
        try:
            entry.update(fn())
        except MorphError as exc:
            if exc.code not in INFEASIBLE_CODES:
                raise
            infeasible = True
            entry["error"] = {"code": exc.code, "message": exc.message}
        results.append(entry)

    for strategy in cfg.strategies:
        if strategy == "extend":
            budgets = cfg.budgets or mf.budgets
            if not budgets:
                raise MorphError("NO_BUDGET", "extension needs at least one budget")
            for b in budgets:
                def run(b=b):
                    prof, sol = agg.solve_extension(kern, sup, mf.items, b, cfg.mcp)
                    return {"profile": _profile_doc(prof), "mcp": _mcp_doc(sol)}
                attempt({"strategy": "extend", "budget": _num(b), "method": cfg.mcp}, run)
        elif strategy == "compress":
            mode = cfg.compress_mode or mf.compression.mode
            limit = cfg.compress_limit if cfg.compress_limit is not None else mf.compression.limit
            method = "exact"  # the greedy start favours cheap deletions, not low lost profit

            def run():
                prof, sol = agg.solve_compression(sup, mf.items, mode, limit, method)
                doc = {"profile": _profile_doc(prof), "mcp": _mcp_doc(sol)}
                if sol is not None:
                    doc["deleted_cost"] = sol.total_cost
                    doc["deleted_profit"] = _num(-sol.total_profit) if sol.total_profit else 0
                return doc
            attempt({"strategy": "compress", "mode": mode, "limit": _num(limit), "method": method}, run)
        elif strategy == "median":
            scores = agg.median_scores(profiles)
            best = scores.index(min(scores))
            results.append({"strategy": "median", "solution": names[best],
                            "profile": _profile_doc(profiles[best]),
                            "objective": scores[best],
                            "scores": dict(zip(names, scores))})
        else:
            raise MorphError("BAD_OPTION", f"unknown strategy {strategy!r}")
    section = {
        "solutions": list(names),
        "kernel": _profile_doc(kern),
        "superstructure": _profile_doc(sup),
        "results": results,
    }
    return section, infeasible


def _model_summary(mf: ModelFile) -> dict[str, Any]:
    m = mf.model
    return {
        "root": m.root,
        "k": m.k,
        "l": m.l,
        "groups": len(m.leaf_groups),
        "alternatives": len(m.all_alternatives()),
        "design_space": count_design_space(m),
    }


def build_report(command: str, mf: ModelFile, cfg: Config, source: str = "",
                 solutions: Sequence[tuple[str, agg.SelectionProfile]] | None = None) -> RunReport:
    """Run the stages ``command`` calls for and collect their output."""
    report = RunReport(command, source, cfg.echo(), _model_summary(mf))
    clock = time.perf_counter

    if command == "rank" or cfg.priorities == "rank":
        t0 = clock()
        ranked, report.ranking = apply_ranking(mf, cfg)
        report.timing["rank"] = clock() - t0
        if cfg.priorities == "rank":
            mf = ranked
    if command == "rank":
        return report

    if solutions is None:
        t0 = clock()
        result = run_synthesis(mf.model, cfg.propagate_layers, cfg.quality)
        report.timing["synth"] = clock() - t0
        if command != "aggregate":
            report.synthesis = synthesis_section(mf, result, cfg)
        if result.failed_node is not None:
            report.infeasible = True
            if command == "aggregate":
                report.synthesis = synthesis_section(mf, result, cfg)
            return report
        solutions = [(s.name, agg.SelectionProfile.from_leaf_profile(s.leaf_profile)) for s in result.root]
    if command == "synth":
        return report

    t0 = clock()
    names = [n for n, _ in solutions]
    profiles = [p for _, p in solutions]
    report.aggregation, infeasible = aggregation_section(mf, names, profiles, cfg)
    report.infeasible = report.infeasible or infeasible
    report.timing["aggregate"] = clock() - t0
    return report


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def render_report(report: RunReport, fmt: str = "text", with_timing: bool = False) -> bytes:
    if fmt == "machine":
        return (json.dumps(report.to_machine(with_timing), indent=2, ensure_ascii=False) + "\n").encode()
    if fmt != "text":
        raise MorphError("BAD_OPTION", f"unknown format {fmt!r}")
    return ("\n".join(_text_lines(report, with_timing)) + "\n").encode()


def _star(values) -> str:
    return " * ".join(values)


def _profile_text(profile: dict[str, list[str]]) -> str:
    return "  ".join(f"{g}: {','.join(das) if das else '-'}" for g, das in profile.items())


def _text_lines(report: RunReport, with_timing: bool) -> list[str]:
    m = report.model
    lines = [
        f"morph {report.command}  {report.source}".rstrip(),
        f"model root {m['root']}, {m['groups']} groups, {m['alternatives']} DAs, "
        f"scales k={m['k']} l={m['l']}, design space {m['design_space']}",
    ]
    if report.ranking is not None:
        th = report.ranking["thresholds"]
        lines += ["", f"ranking (p={th['p']}, q={th['q']})"]
        for gid, das in report.ranking["groups"].items():
            cells = "  ".join(f"{d}={v['computed']} (file {v['file']})" for d, v in das.items())
            lines.append(f"  {gid}: {cells}")
    if report.synthesis is not None:
        syn = report.synthesis
        lines += ["", f"synthesis (quality {syn['quality']}, propagate layers {syn['propagate_layers']})"]
        for node in syn["nodes"]:
            lines.append(f"  node {node['node']} ({node['label']}) = {_star(node['children'])}: "
                         f"{node['admissible']} admissible, {len(node['front'])} on front")
            if not node["front"]:
                lines.append("    no admissible compositions")
            for sol in node["front"]:
                lines.append(_solution_line(sol))
        if syn["failed_node"] is None:
            lines.append(f"  root: {len(syn['root'])} solution(s)")
            for sol in syn["root"]:
                lines.append(f"    {sol['name']:<4} {_star(sol['leaf_profile'].values())}  {sol['quality']['text']}")
    if report.aggregation is not None:
        a = report.aggregation
        lines += ["", f"aggregation over {len(a['solutions'])} solution(s)",
                  f"  kernel:         {_profile_text(a['kernel'])}",
                  f"  superstructure: {_profile_text(a['superstructure'])}"]
        for res in a["results"]:
            lines.append("  " + _result_text(res))
    if with_timing and report.timing:
        lines += ["", "timing: " + ", ".join(f"{k} {v * 1000:.2f} ms" for k, v in report.timing.items())]
    return lines


def _solution_line(sol: dict[str, Any]) -> str:
    sel = _star(sol["selection"].values())
    leaves = list(sol["leaf_profile"].values())
    text = f"    {sol['name']:<4} {sel}"
    if leaves != list(sol["selection"].values()):
        text += f"  [{_star(leaves)}]"
    text += f"  {sol['quality']['text']}"
    if "priority" in sol:
        text += f"  priority {sol['priority']}"
    return text


def _result_text(res: dict[str, Any]) -> str:
    if res["strategy"] == "extend":
        head = f"extend b={res['budget']} ({res['method']})"
    elif res["strategy"] == "compress":
        limit = "unlimited" if res["limit"] is None else f"limit {res['limit']}"
        head = f"compress ({res['mode']}, {limit}, {res['method']})"
    else:
        return (f"median {res['solution']}: {_star(d for das in res['profile'].values() for d in das)}"
                f"  total proximity {res['objective']}")
    if "error" in res:
        return f"{head}: {res['error']['code']} {res['error']['message']}"
    text = f"{head}: {_star(d for das in res['profile'].values() for d in das)}"
    mcp = res.get("mcp")
    if res["strategy"] == "extend" and mcp:
        text += f"  cost {mcp['total_cost']}  profit {mcp['total_profit']}"
    elif res["strategy"] == "compress" and mcp:
        text += f"  deleted cost {res['deleted_cost']}  deleted profit {res['deleted_profit']}"
    return text
