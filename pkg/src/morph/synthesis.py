"""Hierarchical morphological synthesis.

At every composite node, one alternative is chosen per child.  A
composition is scored by its quality vector ``(w; n_1..n_k)``, where ``w``
is the worst pairwise compatibility across children and ``n_r`` counts
the chosen alternatives of priority ``r``.  Compositions with ``w = 0``
are inadmissible.  The nondominated compositions become the alternatives
(composite DAs) of the node one level up.
"""

from __future__ import annotations

import itertools
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import MorphError
from .model import SystemModel

UNITS = "units"
FLAT = "flat"

DEFAULT_BRUTE_CAP = 10**6


@dataclass(frozen=True)
class QualityVector:
    w: int
    n: tuple[int, ...]

    @property
    def m(self) -> int:
        return sum(self.n)

    def __str__(self) -> str:
        return f"({self.w}; {','.join(map(str, self.n))})"


def _prefix(n: Sequence[int]) -> list[int]:
    return list(itertools.accumulate(n))


def _check_shape(a: QualityVector, b: QualityVector) -> None:
    if len(a.n) != len(b.n) or a.m != b.m:
        raise MorphError("SHAPE_MISMATCH", f"cannot compare {a} with {b}")


def weakly_dominates(a: QualityVector, b: QualityVector) -> bool:
    _check_shape(a, b)
    return a.w >= b.w and all(x >= y for x, y in zip(_prefix(a.n), _prefix(b.n)))


def strictly_dominates(a: QualityVector, b: QualityVector) -> bool:
    """True iff ``a`` is at least as good as ``b`` everywhere and better somewhere.

    The n-part is compared through prefix sums, so moving one element to a
    better priority level is always an improvement.
    """
    return weakly_dominates(a, b) and a != b


@dataclass(frozen=True)
class CompositeSolution:
    node: str
    selection: tuple[tuple[str, str], ...]  # (child id, chosen alternative id)
    quality: QualityVector
    leaf_profile: tuple[tuple[str, str], ...]  # (group id, DA id), model leaf order
    name: str = ""
    index: int = 0  # enumeration order at the node

    @property
    def profile(self) -> dict[str, str]:
        return dict(self.leaf_profile)

    def das(self) -> tuple[str, ...]:
        return tuple(da for _, da in self.leaf_profile)


@dataclass(frozen=True)
class CompositeDa:
    """A composite solution acting as an alternative of its node."""

    solution: CompositeSolution
    priority: int

    @property
    def id(self) -> str:
        return self.solution.name

    @property
    def leaf_profile(self):
        return self.solution.leaf_profile

    @property
    def quality(self):
        return self.solution.quality


@dataclass(frozen=True)
class _Option:
    id: str
    priority: int
    leaves: tuple[tuple[str, str], ...]  # (group, da)
    inner_w: int  # worst compatibility inside the option (l for a plain DA)
    inner_n: tuple[int, ...]  # leaf priority counts inside the option


def _unit_vector(k: int, r: int) -> tuple[int, ...]:
    return tuple(1 if i == r - 1 else 0 for i in range(k))


def _option_for(model: SystemModel, unit) -> _Option:
    if isinstance(unit, str):
        da = model.da(unit)
        return _Option(da.id, da.priority, ((da.group, da.id),), model.l,
                       _unit_vector(model.k, da.priority))
    if isinstance(unit, CompositeDa):
        sol = unit.solution
        counts = Counter(model.da(d).priority for _, d in sol.leaf_profile)
        return _Option(unit.id, unit.priority, sol.leaf_profile, sol.quality.w,
                       tuple(counts.get(r, 0) for r in range(1, model.k + 1)))
    if hasattr(unit, "group") and hasattr(unit, "priority"):
        return _option_for(model, unit.id)
    raise TypeError(f"cannot compose {unit!r}")


def _cross_w(model: SystemModel, a: _Option, b: _Option) -> int:
    return min(model.compat(x, y) for _, x in a.leaves for _, y in b.leaves)


def _score(model: SystemModel, options: Sequence[_Option], mode: str,
           cross: int) -> QualityVector:
    if mode == UNITS:
        counts = Counter(o.priority for o in options)
        n = tuple(counts.get(r, 0) for r in range(1, model.k + 1))
        return QualityVector(cross, n)
    w = min([cross] + [o.inner_w for o in options])
    n = tuple(sum(col) for col in zip(*(o.inner_n for o in options)))
    return QualityVector(w, n)


def _worst_cross(model: SystemModel, opts: Sequence[_Option]) -> int:
    worst = model.l
    for i, a in enumerate(opts):
        for b in opts[i + 1:]:
            worst = min(worst, _cross_w(model, a, b))
    return worst


def min_compatibility(model: SystemModel, units: Iterable) -> int:
    """Worst compatibility between the leaf constituents of different units.

    A unit is a DA id, a DesignAlternative or a CompositeDa.  With fewer
    than two units there is no pair and the result is ``model.l``.
    """
    return _worst_cross(model, [_option_for(model, u) for u in units])


def quality_vector(model: SystemModel, units: Iterable, mode: str = UNITS) -> QualityVector:
    opts = [_option_for(model, u) for u in units]
    return _score(model, opts, mode, _worst_cross(model, opts))


# ---------------------------------------------------------------------------
# Pareto filtering
# ---------------------------------------------------------------------------


def _nondominated_vectors(vectors: Iterable[QualityVector]) -> set[QualityVector]:
    distinct = set(vectors)
    return {v for v in distinct if not any(strictly_dominates(u, v) for u in distinct)}


def pareto_front(candidates: Sequence[CompositeSolution]) -> list[CompositeSolution]:
    """Admissible candidates not strictly dominated by another; ties all kept."""
    admissible = [c for c in candidates if c.quality.w > 0]
    keep = _nondominated_vectors(c.quality for c in admissible)
    return sorted((c for c in admissible if c.quality in keep), key=lambda c: (c.index, c.name))


def pareto_layers(candidates: Sequence[CompositeSolution]) -> list[list[CompositeSolution]]:
    """Successive nondominated layers of the admissible candidates."""
    remaining = [c for c in candidates if c.quality.w > 0]
    layers = []
    while remaining:
        keep = _nondominated_vectors(c.quality for c in remaining)
        layers.append(sorted((c for c in remaining if c.quality in keep), key=lambda c: c.index))
        remaining = [c for c in remaining if c.quality not in keep]
    return layers


def _layered(candidates: Sequence[CompositeSolution]) -> list[tuple[int, CompositeSolution]]:
    return sorted(((depth, c) for depth, layer in enumerate(pareto_layers(candidates), start=1)
                   for c in layer), key=lambda item: item[1].index)


def assign_layer_priorities(candidates: Sequence[CompositeSolution], k: int) -> list[CompositeDa]:
    """Promote candidates to composite DAs; priority is the Pareto layer, capped at k."""
    return [CompositeDa(c, min(depth, k)) for depth, c in _layered(candidates)]


# ---------------------------------------------------------------------------
# Composition at one node
# ---------------------------------------------------------------------------


def _order_profile(model: SystemModel, pairs: Iterable[tuple[str, str]]) -> tuple[tuple[str, str], ...]:
    lookup = dict(pairs)
    return tuple((g, lookup[g]) for g in model.leaf_groups if g in lookup)


def compose_node(model: SystemModel, node_id: str,
                 options_per_child: Sequence[Sequence], mode: str = UNITS) -> list[CompositeSolution]:
    """All admissible compositions at ``node_id``, in lexicographic order.

    Partial selections whose running worst compatibility reaches 0 are
    pruned; the running minimum never increases, so this is exact.
    """
    children = model.node(node_id).children
    opts = [[_option_for(model, u) for u in alts] for alts in options_per_child]
    if len(opts) != len(children):
        raise MorphError("SHAPE_MISMATCH", f"{node_id}: expected options for {len(children)} children")

    # cross[(i, j)][a][b] for i < j
    cross = {}
    for i in range(len(opts)):
        for j in range(i + 1, len(opts)):
            cross[(i, j)] = [[_cross_w(model, a, b) for b in opts[j]] for a in opts[i]]

    out: list[CompositeSolution] = []
    chosen: list[int] = []

    def descend(depth: int, running: int):
        if depth == len(opts):
            picked = [opts[i][c] for i, c in enumerate(chosen)]
            quality = _score(model, picked, mode, running)
            if quality.w == 0:
                return
            leaves = _order_profile(model, (p for o in picked for p in o.leaves))
            selection = tuple((children[i], o.id) for i, o in enumerate(picked))
            out.append(CompositeSolution(node_id, selection, quality, leaves, index=len(out)))
            return
        for c in range(len(opts[depth])):
            w = running
            for i, prev in enumerate(chosen):
                w = min(w, cross[(i, depth)][prev][c])
                if w == 0:
                    break
            if w == 0:
                continue
            chosen.append(c)
            descend(depth + 1, w)
            chosen.pop()

    descend(0, model.l)
    return out


def _named(solutions: Iterable[CompositeSolution], node_id: str) -> dict[int, str]:
    return {s.index: f"{node_id}{i}" for i, s in enumerate(sorted(solutions, key=lambda s: s.index), 1)}


def _rename(sol: CompositeSolution, names: Mapping[int, str]) -> CompositeSolution:
    return CompositeSolution(sol.node, sol.selection, sol.quality, sol.leaf_profile,
                             names.get(sol.index, ""), sol.index)


@dataclass
class SynthesisResult:
    fronts: dict[str, list[CompositeSolution]] = field(default_factory=dict)
    propagated: dict[str, list[CompositeDa]] = field(default_factory=dict)
    candidates: dict[str, int] = field(default_factory=dict)  # admissible count per node
    root: list[CompositeSolution] = field(default_factory=list)
    failed_node: str | None = None

    def root_profiles(self) -> set[tuple[tuple[str, str], ...]]:
        return {s.leaf_profile for s in self.root}


def run_synthesis(model: SystemModel, propagate_layers: int = 1, mode: str = UNITS) -> SynthesisResult:
    """Bottom-up synthesis that records, rather than raises, an empty front."""
    if mode not in (UNITS, FLAT):
        raise MorphError("BAD_OPTION", f"unknown quality mode {mode!r}")
    if propagate_layers < 1:
        raise MorphError("BAD_OPTION", "propagate_layers must be >= 1")
    result = SynthesisResult()
    root_node = model.node(model.root)
    if root_node.is_group:
        sols = [CompositeSolution(model.root, ((model.root, da.id),),
                                  QualityVector(model.l, _unit_vector(model.k, da.priority)),
                                  ((model.root, da.id),), da.id, i)
                for i, da in enumerate(root_node.alternatives)]
        front = pareto_front(sols)
        result.fronts[model.root] = front
        result.candidates[model.root] = len(sols)
        result.root = front
        return result

    for nid in model.internal_postorder():
        options = []
        for child in model.node(nid).children:
            node = model.node(child)
            options.append([da.id for da in node.alternatives] if node.is_group
                           else result.propagated[child])
        candidates = compose_node(model, nid, options, mode)
        result.candidates[nid] = len(candidates)
        if not candidates:
            result.fronts[nid] = []
            result.failed_node = nid
            return result
        layered = [(depth, c) for depth, c in _layered(candidates) if depth <= propagate_layers]
        names = _named((c for _, c in layered), nid)
        kept = [CompositeDa(_rename(c, names), min(depth, model.k)) for depth, c in layered]
        result.propagated[nid] = kept
        result.fronts[nid] = [d.solution for (depth, _), d in zip(layered, kept) if depth == 1]
    result.root = result.fronts[model.root]
    return result


def synthesize(model: SystemModel, propagate_layers: int = 1, mode: str = UNITS) -> SynthesisResult:
    result = run_synthesis(model, propagate_layers, mode)
    if result.failed_node is not None:
        raise MorphError("EMPTY_FRONT", f"every composition at {result.failed_node!r} has w = 0")
    return result


# ---------------------------------------------------------------------------
# Exhaustive oracle
# ---------------------------------------------------------------------------


def brute_cap() -> int:
    raw = os.environ.get("MORPH_BRUTE_CAP")
    if raw is None:
        return DEFAULT_BRUTE_CAP
    try:
        return int(raw)
    except ValueError:
        raise MorphError("BAD_OPTION", f"MORPH_BRUTE_CAP must be an integer, got {raw!r}") from None


def brute_force_synthesize(model: SystemModel, cap: int | None = None) -> list[CompositeSolution]:
    """Pareto front over every full leaf profile, scored at the root scope."""
    from .model import count_design_space

    cap = brute_cap() if cap is None else cap
    total = count_design_space(model)
    if total > cap:
        raise MorphError("CAP_EXCEEDED", f"{total} profiles exceed the cap of {cap}")
    groups = model.leaf_groups
    alts = [model.node(g).alternatives for g in groups]
    pair_w = {}
    for i in range(len(groups)):
        for j in range(i + 1, len(groups)):
            pair_w[(i, j)] = [[model.compat(a.id, b.id) for b in alts[j]] for a in alts[i]]

    sols = []
    for index, combo in enumerate(itertools.product(*(range(len(a)) for a in alts))):
        w = model.l
        for (i, j), table in pair_w.items():
            w = min(w, table[combo[i]][combo[j]])
            if w == 0:
                break
        counts = Counter(alts[i][c].priority for i, c in enumerate(combo))
        n = tuple(counts.get(r, 0) for r in range(1, model.k + 1))
        profile = tuple((groups[i], alts[i][c].id) for i, c in enumerate(combo))
        sols.append(CompositeSolution(model.root, profile, QualityVector(w, n), profile, index=index))
    front = pareto_front(sols)
    names = _named(front, model.root)
    return [_rename(s, names) for s in front]
