"""Hierarchical system model: component groups, design alternatives, compatibility.

A model is a rooted tree.  Leaves are *groups* holding the design
alternatives (DAs) for one system part; internal nodes are *composites*
whose children are combined by choosing one alternative per child.
Pairwise compatibility between DAs lives in matrices attached to the
internal node that is the lowest common ancestor of the two DAs' groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping

from .errors import MorphError

GROUP = "group"
COMPOSITE = "composite"


@dataclass(frozen=True)
class DesignAlternative:
    id: str
    group: str
    name: str
    priority: int


@dataclass(frozen=True)
class Node:
    id: str
    label: str
    kind: str
    children: tuple[str, ...] = ()
    alternatives: tuple[DesignAlternative, ...] = ()

    @property
    def is_group(self) -> bool:
        return self.kind == GROUP


@dataclass(frozen=True)
class CompatibilityMatrix:
    """Ordinal compatibility between DAs of different child subtrees of ``scope``.

    ``entries`` keeps pairs in the orientation they were supplied; lookups
    are symmetric.  ``default`` covers any pair not listed.
    """

    scope: str
    entries: Mapping[tuple[str, str], int] = field(default_factory=dict)
    default: int | None = None

    def lookup(self, a: str, b: str) -> int | None:
        if (a, b) in self.entries:
            return self.entries[(a, b)]
        if (b, a) in self.entries:
            return self.entries[(b, a)]
        return self.default


@dataclass(frozen=True)
class SystemModel:
    root: str
    nodes: Mapping[str, Node]
    k: int
    l: int
    compatibility: tuple[CompatibilityMatrix, ...] = ()

    # -- structure -------------------------------------------------------

    def node(self, node_id: str) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise MorphError("UNKNOWN_NODE", f"no node {node_id!r}") from None

    @cached_property
    def parents(self) -> dict[str, str]:
        out = {}
        for node in self.nodes.values():
            for child in node.children:
                out.setdefault(child, node.id)
        return out

    @cached_property
    def leaf_groups(self) -> tuple[str, ...]:
        """Group ids in depth-first, child-order traversal from the root."""
        return self._leaves(self.root)

    def _leaves(self, node_id: str) -> tuple[str, ...]:
        out = []
        stack = [node_id]
        seen = set()
        while stack:
            nid = stack.pop()
            if nid in seen or nid not in self.nodes:
                continue
            seen.add(nid)
            node = self.nodes[nid]
            if node.is_group:
                out.append(nid)
            else:
                stack.extend(reversed(node.children))
        return tuple(out)

    def leaves_under(self, node_id: str) -> tuple[str, ...]:
        return self._leaves(node_id)

    def internal_postorder(self) -> list[str]:
        """Composite node ids, children before parents."""
        order = []

        def visit(nid):
            node = self.nodes[nid]
            if node.is_group:
                return
            for child in node.children:
                visit(child)
            order.append(nid)

        visit(self.root)
        return order

    def ancestors(self, node_id: str) -> list[str]:
        """``node_id`` followed by its ancestors up to the root."""
        path = [node_id]
        while path[-1] in self.parents and len(path) <= len(self.nodes):
            path.append(self.parents[path[-1]])
        return path

    def lca(self, a: str, b: str) -> str:
        above_a = self.ancestors(a)
        seen = set(above_a)
        for nid in self.ancestors(b):
            if nid in seen:
                return nid
        raise MorphError("UNRELATED_PAIR", f"{a!r} and {b!r} share no ancestor")

    # -- alternatives ----------------------------------------------------

    @cached_property
    def _da_index(self) -> dict[str, DesignAlternative]:
        index = {}
        for node in self.nodes.values():
            for da in node.alternatives:
                index.setdefault(da.id, da)
        return index

    def da(self, da_id: str) -> DesignAlternative:
        try:
            return self._da_index[da_id]
        except KeyError:
            raise MorphError("UNKNOWN_DA", f"no design alternative {da_id!r}") from None

    def alternatives(self, group: str) -> tuple[DesignAlternative, ...]:
        return self.node(group).alternatives

    def all_alternatives(self) -> list[DesignAlternative]:
        return [da for g in self.leaf_groups for da in self.nodes[g].alternatives]

    # -- compatibility ---------------------------------------------------

    @cached_property
    def _matrices(self) -> dict[str, CompatibilityMatrix]:
        return {m.scope: m for m in self.compatibility}

    def matrix(self, scope: str) -> CompatibilityMatrix | None:
        return self._matrices.get(scope)

    def compat(self, a: str, b: str) -> int:
        """Resolved compatibility of two DAs from different groups."""
        ga, gb = self.da(a).group, self.da(b).group
        if ga == gb:
            raise MorphError("UNRELATED_PAIR", f"{a!r} and {b!r} are in the same group")
        scope = self.lca(ga, gb)
        matrix = self._matrices.get(scope)
        value = matrix.lookup(a, b) if matrix is not None else None
        if value is None:
            raise MorphError("UNRELATED_PAIR", f"no compatibility for ({a}, {b}) at {scope!r}")
        return value

    # -- derived models --------------------------------------------------

    def with_priorities(self, priorities: Mapping[str, int]) -> "SystemModel":
        """Copy of the model with DA priorities replaced where given."""
        nodes = {}
        for nid, node in self.nodes.items():
            if node.alternatives:
                alts = tuple(
                    replace(da, priority=priorities.get(da.id, da.priority))
                    for da in node.alternatives
                )
                node = replace(node, alternatives=alts)
            nodes[nid] = node
        return replace(self, nodes=nodes)


def count_design_space(model: SystemModel) -> int:
    """Number of one-DA-per-group compositions, ignoring compatibility."""
    return math.prod(len(model.nodes[g].alternatives) for g in model.leaf_groups)


def compat(model: SystemModel, a: str, b: str) -> int:
    return model.compat(a, b)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Issue:
    code: str
    ref: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[Issue, ...] = ()
    warnings: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def codes(self) -> list[str]:
        return [e.code for e in self.errors]


def validate_model(model: SystemModel) -> ValidationReport:
    errors: list[Issue] = []
    warnings: list[Issue] = []

    def err(code, ref, msg):
        errors.append(Issue(code, ref, msg))

    for name in ("k", "l"):
        value = getattr(model, name)
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            err("BAD_SCALE", name, f"scale {name} must be an integer >= 1, got {value!r}")
    k = model.k if isinstance(model.k, int) else 0
    l = model.l if isinstance(model.l, int) else 0

    for key, node in model.nodes.items():
        if key != node.id:
            err("NODE_ID_MISMATCH", key, f"node stored under {key!r} has id {node.id!r}")

    if model.root not in model.nodes:
        err("UNKNOWN_ROOT", model.root, "root is not a node of the model")
        return ValidationReport(tuple(errors), tuple(warnings))

    # tree shape
    parent_of: dict[str, str] = {}
    for node in model.nodes.values():
        for child in node.children:
            if child not in model.nodes:
                err("UNKNOWN_CHILD", node.id, f"child {child!r} is not a node")
            elif child == model.root:
                err("ROOT_HAS_PARENT", child, f"root listed as child of {node.id!r}")
            elif child in parent_of:
                err("MULTIPLE_PARENTS", child,
                    f"child of both {parent_of[child]!r} and {node.id!r}")
            else:
                parent_of[child] = node.id

    reached = set()
    stack = [model.root]
    while stack:
        nid = stack.pop()
        if nid in reached:
            err("CYCLE", nid, "node reached twice from the root")
            continue
        reached.add(nid)
        stack.extend(c for c in model.nodes[nid].children if c in model.nodes)
    for nid in model.nodes:
        if nid not in reached:
            err("UNREACHABLE_NODE", nid, "node not reachable from the root")

    seen_da: dict[str, str] = {}
    for node in model.nodes.values():
        if node.kind not in (GROUP, COMPOSITE):
            err("KIND_MISMATCH", node.id, f"unknown node kind {node.kind!r}")
        elif node.kind == GROUP:
            if node.children:
                err("KIND_MISMATCH", node.id, "group node has children")
            if not node.alternatives:
                err("EMPTY_GROUP", node.id, "group has no design alternatives")
        else:
            if node.alternatives:
                err("KIND_MISMATCH", node.id, "composite node carries alternatives")
            if not node.children:
                err("EMPTY_COMPOSITE", node.id, "composite node has no children")
            elif len(node.children) == 1:
                warnings.append(Issue("SINGLE_CHILD", node.id, "composite with one child"))
        for da in node.alternatives:
            if da.id in seen_da:
                err("DUPLICATE_DA", da.id, f"also defined in {seen_da[da.id]!r}")
            seen_da[da.id] = node.id
            if da.group != node.id:
                err("DA_GROUP_MISMATCH", da.id, f"declares group {da.group!r}, lives in {node.id!r}")
            if isinstance(da.priority, bool) or not isinstance(da.priority, int) \
                    or not 1 <= da.priority <= max(k, 1):
                err("PRIORITY_OUT_OF_RANGE", da.id, f"priority {da.priority!r} outside [1, {k}]")

    if errors:
        # compatibility checks need a sound tree
        return ValidationReport(tuple(errors), tuple(warnings))

    seen_scope = set()
    for matrix in model.compatibility:
        scope = matrix.scope
        if scope not in model.nodes or model.nodes[scope].is_group:
            err("UNKNOWN_SCOPE", scope, "compatibility scope must be a composite node")
            continue
        if scope in seen_scope:
            err("DUPLICATE_SCOPE", scope, "more than one matrix for this scope")
        seen_scope.add(scope)
        if matrix.default is not None and not _in_range(matrix.default, l):
            err("COMPAT_OUT_OF_RANGE", scope, f"default {matrix.default!r} outside [0, {l}]")
        for (a, b), w in matrix.entries.items():
            ref = f"{scope}:{a}~{b}"
            if a not in seen_da or b not in seen_da:
                err("UNKNOWN_DA", ref, "entry names an unknown design alternative")
                continue
            if not _in_range(w, l):
                err("COMPAT_OUT_OF_RANGE", ref, f"value {w!r} outside [0, {l}]")
            ga, gb = seen_da[a], seen_da[b]
            if ga == gb or model.lca(ga, gb) != scope:
                err("COMPAT_SCOPE_MISMATCH", ref,
                    "pair does not span two different child subtrees of the scope")
            back = matrix.entries.get((b, a))
            if back is not None and back != w and a < b:
                err("ASYMMETRIC_COMPAT", ref, f"entry({a},{b})={w} but entry({b},{a})={back}")

    for nid in model.internal_postorder():
        children = model.nodes[nid].children
        if len(children) < 2:
            continue
        matrix = model.matrix(nid)
        for i, ci in enumerate(children):
            for cj in children[i + 1:]:
                for ga in model.leaves_under(ci):
                    for gb in model.leaves_under(cj):
                        for da_a in model.nodes[ga].alternatives:
                            for da_b in model.nodes[gb].alternatives:
                                if matrix is None or matrix.lookup(da_a.id, da_b.id) is None:
                                    err("MISSING_COMPAT", f"{nid}:{da_a.id}~{da_b.id}",
                                        "pair has no compatibility value")

    return ValidationReport(tuple(errors), tuple(warnings))


def _in_range(w, l) -> bool:
    return isinstance(w, int) and not isinstance(w, bool) and 0 <= w <= l


def require_valid(model: SystemModel) -> SystemModel:
    report = validate_model(model)
    if not report.ok:
        first = report.errors[0]
        raise MorphError("VALIDATION_ERROR",
                         f"{len(report.errors)} error(s), first {first.code} at {first.ref}",
                         detail=report)
    return model


def build_model(root: str, k: int, l: int, groups: Mapping[str, Iterable],
                composites: Mapping[str, Iterable[str]] = (),
                compatibility: Iterable[CompatibilityMatrix] = (),
                labels: Mapping[str, str] | None = None) -> SystemModel:
    """Convenience constructor.

    ``groups`` maps group id to ``(da_id, priority)`` or
    ``(da_id, name, priority)`` tuples; ``composites`` maps composite id to
    its ordered children.
    """
    labels = labels or {}
    nodes: dict[str, Node] = {}
    for gid, das in groups.items():
        alts = []
        for item in das:
            if len(item) == 2:
                da_id, prio = item
                name = da_id
            else:
                da_id, name, prio = item
            alts.append(DesignAlternative(da_id, gid, name, prio))
        nodes[gid] = Node(gid, labels.get(gid, gid), GROUP, (), tuple(alts))
    for cid, children in dict(composites).items():
        nodes[cid] = Node(cid, labels.get(cid, cid), COMPOSITE, tuple(children))
    return SystemModel(root, nodes, k, l, tuple(compatibility))
