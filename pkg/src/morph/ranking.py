"""Ordinal ranking of a group's design alternatives by outranking.

Classical ELECTRE I: a concordance index (weighted share of criteria on
which ``a`` is at least as good as ``b``) and a discordance index (largest
normalised margin by which ``b`` beats ``a``) define an outranking graph;
priorities are the layers of that graph's condensation.

Concordance is computed in exact rational arithmetic so that rescaling
all weights by a positive constant gives a bit-identical graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import MorphError


@dataclass(frozen=True)
class CriterionSpec:
    id: str
    name: str
    weight: float  # sign gives direction, magnitude gives importance

    def __post_init__(self):
        if not self.weight or not math.isfinite(self.weight):
            raise MorphError("BAD_CRITERION", f"criterion {self.id!r} needs a finite nonzero weight")


@dataclass(frozen=True)
class EstimateTable:
    group: str
    alternatives: tuple[str, ...]
    criteria: tuple[CriterionSpec, ...]
    values: Mapping[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self):
        for key, v in self.values.items():
            if not math.isfinite(v):
                raise MorphError("BAD_ESTIMATE", f"non-finite estimate at {key}")

    @property
    def active(self) -> tuple[CriterionSpec, ...]:
        """Criteria with a value for every alternative of the group."""
        return tuple(
            c for c in self.criteria
            if all((a, c.id) in self.values for a in self.alternatives)
        )

    def value(self, da: str, criterion: CriterionSpec) -> float:
        return self.values[(da, criterion.id)]


@dataclass(frozen=True)
class Thresholds:
    concordance_min: float = 0.5
    discordance_max: float = 1.0

    def __post_init__(self):
        if not 0 < self.concordance_min <= 1:
            raise MorphError("BAD_THRESHOLD", "concordance threshold must lie in (0, 1]")
        if not 0 <= self.discordance_max <= 1:
            raise MorphError("BAD_THRESHOLD", "discordance threshold must lie in [0, 1]")


@dataclass(frozen=True)
class OutrankingGraph:
    vertices: tuple[str, ...]
    arcs: frozenset[tuple[str, str]]


def _active_or_raise(table: EstimateTable) -> tuple[CriterionSpec, ...]:
    active = table.active
    if not active:
        raise MorphError("NO_ACTIVE_CRITERIA", f"group {table.group!r} has no fully estimated criterion")
    return active


def _advantage(table: EstimateTable, c: CriterionSpec, a: str, b: str) -> Fraction:
    """Direction-adjusted amount by which ``a`` beats ``b`` on ``c``."""
    diff = Fraction(table.value(a, c)) - Fraction(table.value(b, c))
    return diff if c.weight > 0 else -diff


def concordance_exact(a: str, b: str, table: EstimateTable) -> Fraction:
    active = _active_or_raise(table)
    total = sum(abs(Fraction(c.weight)) for c in active)
    agree = sum(
        (abs(Fraction(c.weight)) for c in active if _advantage(table, c, a, b) >= 0),
        Fraction(0),
    )
    return agree / total


def discordance_exact(a: str, b: str, table: EstimateTable) -> Fraction:
    active = _active_or_raise(table)
    worst = Fraction(0)
    for c in active:
        margin = -_advantage(table, c, a, b)
        if margin <= 0:
            continue
        column = [Fraction(table.value(x, c)) for x in table.alternatives]
        spread = max(column) - min(column)
        if spread:
            worst = max(worst, margin / spread)
    return worst


def concordance(a: str, b: str, table: EstimateTable) -> float:
    return float(concordance_exact(a, b, table))


def discordance(a: str, b: str, table: EstimateTable) -> float:
    return float(discordance_exact(a, b, table))


def outranking_graph(table: EstimateTable, t: Thresholds = Thresholds()) -> OutrankingGraph:
    p = Fraction(t.concordance_min)
    q = Fraction(t.discordance_max)
    arcs = set()
    for a in table.alternatives:
        for b in table.alternatives:
            if a == b:
                continue
            if concordance_exact(a, b, table) >= p and discordance_exact(a, b, table) <= q:
                arcs.add((a, b))
    return OutrankingGraph(tuple(table.alternatives), frozenset(arcs))


def _strong_components(vertices: Sequence[str], succ: Mapping[str, list[str]]) -> list[list[str]]:
    # iterative Tarjan
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    components = []
    counter = 0
    for start in vertices:
        if start in index:
            continue
        work = [(start, iter(succ[start]))]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            v, it = work[-1]
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    low[work[-1][0]] = min(low[work[-1][0]], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    components.append(comp)
    return components


def layer_indices(g: OutrankingGraph) -> dict[str, int]:
    """Uncapped 1-based layer of every vertex in the condensed graph."""
    succ: dict[str, list[str]] = {v: [] for v in g.vertices}
    for a, b in sorted(g.arcs):
        if a != b:
            succ[a].append(b)
    comps = _strong_components(g.vertices, succ)
    comp_of = {v: i for i, comp in enumerate(comps) for v in comp}
    incoming: dict[int, set[int]] = {i: set() for i in range(len(comps))}
    for a, b in g.arcs:
        if comp_of[a] != comp_of[b]:
            incoming[comp_of[b]].add(comp_of[a])

    layer: dict[int, int] = {}
    remaining = set(incoming)
    depth = 0
    while remaining:
        depth += 1
        sources = {c for c in remaining if not (incoming[c] & remaining)}
        for c in sources:
            layer[c] = depth
        remaining -= sources
    return {v: layer[comp_of[v]] for v in g.vertices}


def rank_layers(g: OutrankingGraph, k: int | None = None) -> dict[str, int]:
    """Priority per DA: layer in the condensation, capped at ``k``."""
    layers = layer_indices(g)
    if k is None:
        return layers
    return {v: min(r, k) for v, r in layers.items()}


def rank_group(table: EstimateTable, t: Thresholds = Thresholds(), k: int = 3) -> dict[str, int]:
    if len(table.alternatives) == 1:
        return {table.alternatives[0]: 1}
    return rank_layers(outranking_graph(table, t), k)


def estimate_tables(model, criteria: Iterable[CriterionSpec],
                    estimates: Mapping[str, Mapping[str, float]]) -> list[EstimateTable]:
    """One table per leaf group of ``model``, in model order."""
    criteria = tuple(criteria)
    tables = []
    for gid in model.leaf_groups:
        das = tuple(da.id for da in model.nodes[gid].alternatives)
        values = {
            (da, cid): float(v)
            for da in das
            for cid, v in estimates.get(da, {}).items()
        }
        tables.append(EstimateTable(gid, das, criteria, values))
    return tables


def rank_model(model, criteria, estimates, t: Thresholds = Thresholds()) -> dict[str, int]:
    """Priorities for every DA of the model, ranked group by group."""
    out: dict[str, int] = {}
    for table in estimate_tables(model, criteria, estimates):
        out.update(rank_group(table, t, model.k))
    return out
