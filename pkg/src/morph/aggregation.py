"""Aggregating several composite solutions into one.

Three strategies are provided:

* extension: keep the kernel (per-group intersection of the solutions)
  and fill the open groups by a multiple-choice knapsack over the
  superstructure's candidates;
* compression: start from the superstructure (per-group union) and
  delete all but one DA in each multi-valued group, losing as little
  profit as possible under a deletion budget;
* set median: pick the initial solution closest in total to the others.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, ROUND_FLOOR
from typing import Iterable, Mapping, Sequence

from .errors import MorphError

MAX_DECIMALS = 3


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------


def _natural_key(da_id: str):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", da_id)]


@dataclass(frozen=True)
class SelectionProfile:
    """DAs chosen per leaf group; a concrete solution has one per group."""

    choices: tuple[tuple[str, tuple[str, ...]], ...]

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Iterable[str]], groups: Sequence[str] | None = None,
                     order: Mapping[str, int] | None = None) -> "SelectionProfile":
        groups = list(mapping) if groups is None else groups
        key = (lambda d: (order.get(d, len(order)), _natural_key(d))) if order else _natural_key
        return cls(tuple((g, tuple(sorted(set(mapping.get(g, ())), key=key))) for g in groups))

    @classmethod
    def from_leaf_profile(cls, leaf_profile: Iterable[tuple[str, str]]) -> "SelectionProfile":
        return cls(tuple((g, (d,)) for g, d in leaf_profile))

    @property
    def groups(self) -> tuple[str, ...]:
        return tuple(g for g, _ in self.choices)

    def get(self, group: str) -> tuple[str, ...]:
        for g, das in self.choices:
            if g == group:
                return das
        raise MorphError("UNKNOWN_GROUP", f"profile has no group {group!r}")

    def as_dict(self) -> dict[str, tuple[str, ...]]:
        return dict(self.choices)

    @property
    def is_single_valued(self) -> bool:
        return all(len(das) == 1 for _, das in self.choices)

    def single(self) -> dict[str, str]:
        if not self.is_single_valued:
            raise MorphError("SHAPE_MISMATCH", "profile is not single-valued")
        return {g: das[0] for g, das in self.choices}

    def das(self) -> tuple[str, ...]:
        return tuple(d for _, das in self.choices for d in das)

    def issubset(self, other: "SelectionProfile") -> bool:
        theirs = other.as_dict()
        return all(g in theirs and set(das) <= set(theirs[g]) for g, das in self.choices)


def _same_groups(solutions: Sequence[SelectionProfile]) -> tuple[str, ...]:
    if not solutions:
        raise MorphError("EMPTY_INPUT", "at least one solution is required")
    groups = solutions[0].groups
    for s in solutions[1:]:
        if s.groups != groups:
            raise MorphError("SHAPE_MISMATCH", "solutions cover different groups")
    return groups


def kernel(solutions: Sequence[SelectionProfile], order: Mapping[str, int] | None = None) -> SelectionProfile:
    """Per-group intersection (the substructure)."""
    groups = _same_groups(solutions)
    out = {}
    for g in groups:
        common = set(solutions[0].get(g))
        for s in solutions[1:]:
            common &= set(s.get(g))
        out[g] = common
    return SelectionProfile.from_mapping(out, groups, order)


def superstructure(solutions: Sequence[SelectionProfile], order: Mapping[str, int] | None = None) -> SelectionProfile:
    """Per-group union."""
    groups = _same_groups(solutions)
    out = {g: set().union(*(s.get(g) for s in solutions)) for g in groups}
    return SelectionProfile.from_mapping(out, groups, order)


# ---------------------------------------------------------------------------
# Multiple-choice knapsack
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McpItem:
    group: int
    index: int
    da: str
    cost: float
    profit: float

    def __post_init__(self):
        if self.cost < 0:
            raise MorphError("BAD_ITEM", f"{self.da}: cost must be nonnegative")


@dataclass(frozen=True)
class McpInstance:
    groups: tuple[tuple[McpItem, ...], ...]
    budget: float

    def __post_init__(self):
        if any(not g for g in self.groups):
            raise MorphError("BAD_INSTANCE", "every group needs at least one item")
        if self.budget < 0:
            raise MorphError("BAD_INSTANCE", "budget must be nonnegative")

    @classmethod
    def from_table(cls, groups: Sequence[Sequence[tuple[str, float, float]]], budget: float) -> "McpInstance":
        """Build from ``[[(da, cost, profit), ...], ...]``."""
        return cls(tuple(tuple(McpItem(i, j, da, c, p) for j, (da, c, p) in enumerate(g))
                         for i, g in enumerate(groups)), budget)


@dataclass(frozen=True)
class McpSolution:
    picks: tuple[McpItem, ...]
    total_cost: float
    total_profit: float
    method: str

    @property
    def das(self) -> tuple[str, ...]:
        return tuple(p.da for p in self.picks)


def _dec(x) -> Decimal:
    return Decimal(repr(x)) if isinstance(x, float) else Decimal(x)


def _solution(picks, method) -> McpSolution:
    cost = sum((_dec(p.cost) for p in picks), Decimal(0))
    profit = sum((_dec(p.profit) for p in picks), Decimal(0))
    return McpSolution(tuple(picks), _num(cost), _num(profit), method)


def _num(d: Decimal):
    return int(d) if d == d.to_integral_value() else float(d)


def _check_feasible(inst: McpInstance) -> None:
    floor = sum((min(_dec(it.cost) for it in g) for g in inst.groups), Decimal(0))
    if floor > _dec(inst.budget):
        raise MorphError("INFEASIBLE",
                         f"cheapest selection costs {_num(floor)} > budget {_num(_dec(inst.budget))}")


def mcp_greedy(inst: McpInstance) -> McpSolution:
    """Ratio-greedy heuristic.

    Start from the cheapest item of every group, then repeatedly take the
    single in-group upgrade with the best profit gain per unit of extra
    cost that still fits the budget.  On the sensor example this picks
    R3 at b=14 and upgrades it to R4 once b=15 frees one more unit.
    """
    _check_feasible(inst)
    budget = _dec(inst.budget)
    current = [min(g, key=lambda it: (_dec(it.cost), -_dec(it.profit), it.index)) for g in inst.groups]
    spent = sum((_dec(it.cost) for it in current), Decimal(0))
    while True:
        best = None
        for gi, group in enumerate(inst.groups):
            cur = current[gi]
            for it in group:
                dc = _dec(it.cost) - _dec(cur.cost)
                dp = _dec(it.profit) - _dec(cur.profit)
                if dc <= 0 or dp <= 0 or spent + dc > budget:
                    continue
                key = (dp / dc, dp, -gi, -it.index)
                if best is None or key > best[0]:
                    best = (key, gi, it, dc)
        if best is None:
            return _solution(current, "greedy")
        _, gi, it, dc = best
        current[gi] = it
        spent += dc


def _decimals(x) -> int:
    exp = _dec(x).normalize().as_tuple().exponent
    return max(0, -exp) if isinstance(exp, int) else 0


def mcp_exact(inst: McpInstance) -> McpSolution:
    """Dynamic program over groups x integer budget.

    Costs are scaled by ``10**d`` for the largest number of decimals ``d``
    among them (at most three).  Among optimal selections the one with the
    lexicographically smallest item indices is returned.
    """
    _check_feasible(inst)
    digits = max(_decimals(it.cost) for g in inst.groups for it in g)
    if digits > MAX_DECIMALS:
        raise MorphError("SCALE_EXCEEDED", f"costs need {digits} decimals, at most {MAX_DECIMALS} supported")
    scale = Decimal(10) ** digits
    costs = [[int(_dec(it.cost) * scale) for it in g] for g in inst.groups]
    ceiling = sum(max(c) for c in costs)
    budget = _dec(inst.budget)
    cap = ceiling if budget.is_infinite() else min(ceiling, int((budget * scale).to_integral_value(ROUND_FLOOR)))

    neg = float("-inf")
    # best[i][c]: max profit of groups i.. using at most c
    best = [None] * (len(inst.groups) + 1)
    best[-1] = [0.0] * (cap + 1)
    for i in range(len(inst.groups) - 1, -1, -1):
        nxt = best[i + 1]
        row = [neg] * (cap + 1)
        for c in range(cap + 1):
            top = neg
            for it, cost in zip(inst.groups[i], costs[i]):
                if cost <= c and nxt[c - cost] != neg:
                    top = max(top, it.profit + nxt[c - cost])
            row[c] = top
        best[i] = row
    if best[0][cap] == neg:
        raise MorphError("INFEASIBLE", "no selection fits the budget")

    picks = []
    c = cap
    for i, group in enumerate(inst.groups):
        for it, cost in zip(group, costs[i]):
            if cost <= c and best[i + 1][c - cost] != neg and it.profit + best[i + 1][c - cost] == best[i][c]:
                picks.append(it)
                c -= cost
                break
    return _solution(picks, "exact")


SOLVERS = {"greedy": mcp_greedy, "exact": mcp_exact}


def solve_mcp(inst: McpInstance, method: str = "greedy") -> McpSolution:
    try:
        solver = SOLVERS[method]
    except KeyError:
        raise MorphError("BAD_OPTION", f"unknown MCP method {method!r}") from None
    return solver(inst)


# ---------------------------------------------------------------------------
# Extension and compression
# ---------------------------------------------------------------------------


def _item_data(items: Mapping[str, tuple[float, float]], da: str) -> tuple[float, float]:
    try:
        return items[da]
    except KeyError:
        raise MorphError("MISSING_ITEM_DATA", f"no cost/profit for {da!r}") from None


def extension_instance(kern: SelectionProfile, sup: SelectionProfile,
                       items: Mapping[str, tuple[float, float]], budget: float) -> tuple[list[str], McpInstance | None]:
    """Open groups and the knapsack over their superstructure candidates."""
    if not kern.issubset(sup) or kern.groups != sup.groups:
        raise MorphError("SHAPE_MISMATCH", "kernel must be contained in the superstructure")
    open_groups, table = [], []
    for g, das in kern.choices:
        if len(das) > 1:
            raise MorphError("SHAPE_MISMATCH", f"kernel group {g!r} holds several DAs")
        if das:
            continue
        candidates = sup.get(g)
        if not candidates:
            raise MorphError("MISSING_ITEM_DATA", f"group {g!r} has no candidate to extend with")
        open_groups.append(g)
        table.append([(d, *_item_data(items, d)) for d in candidates])
    if not open_groups:
        return [], None
    return open_groups, McpInstance.from_table(table, budget)


def solve_extension(kern, sup, items, budget, method="greedy"):
    """Extended profile and the knapsack solution behind it (None if nothing was open)."""
    open_groups, inst = extension_instance(kern, sup, items, budget)
    if inst is None:
        return kern, None
    sol = solve_mcp(inst, method)
    filled = dict(kern.choices)
    for g, pick in zip(open_groups, sol.picks):
        filled[g] = (pick.da,)
    return SelectionProfile(tuple((g, filled[g]) for g in kern.groups)), sol


def extend_kernel(kern: SelectionProfile, sup: SelectionProfile,
                  items: Mapping[str, tuple[float, float]], budget: float,
                  method: str = "greedy") -> SelectionProfile:
    return solve_extension(kern, sup, items, budget, method)[0]


def compression_instance(sup: SelectionProfile, items: Mapping[str, tuple[float, float]],
                         mode: str = "budget", limit: float | None = None) -> tuple[list[str], McpInstance | None]:
    """Knapsack whose items are 'keep this DA, delete the rest' patterns.

    Pattern cost is the deletion cost of the dropped DAs (or their number
    in ``count`` mode); pattern profit is minus their total profit, so
    maximising profit minimises the profit removed.
    """
    if mode not in ("budget", "count"):
        raise MorphError("BAD_OPTION", f"unknown compression mode {mode!r}")
    multi, table = [], []
    for g, das in sup.choices:
        if not das:
            raise MorphError("SHAPE_MISMATCH", f"superstructure group {g!r} is empty")
        if len(das) == 1:
            continue
        multi.append(g)
        row = []
        for keep in das:
            dropped = [d for d in das if d != keep]
            if mode == "count":
                cost = len(dropped)
            else:
                cost = _num(sum((_dec(_item_data(items, d)[0]) for d in dropped), Decimal(0)))
            lost = sum((_dec(_item_data(items, d)[1]) for d in dropped), Decimal(0))
            row.append((keep, cost, _num(-lost)))
        table.append(row)
    if not multi:
        return [], None
    return multi, McpInstance.from_table(table, float("inf") if limit is None else limit)


def solve_compression(sup, items, mode="budget", limit=None, method="exact"):
    multi, inst = compression_instance(sup, items, mode, limit)
    if inst is None:
        return sup, None
    sol = solve_mcp(inst, method)
    kept = dict(sup.choices)
    for g, pick in zip(multi, sol.picks):
        kept[g] = (pick.da,)
    return SelectionProfile(tuple((g, kept[g]) for g in sup.groups)), sol


def compress_superstructure(sup: SelectionProfile, items: Mapping[str, tuple[float, float]],
                            mode: str = "budget", limit: float | None = None,
                            method: str = "exact") -> SelectionProfile:
    return solve_compression(sup, items, mode, limit, method)[0]


# ---------------------------------------------------------------------------
# Proximity and set median
# ---------------------------------------------------------------------------


def proximity(x: SelectionProfile, y: SelectionProfile) -> int:
    """Number of groups whose chosen DA differs."""
    if x.groups != y.groups or not (x.is_single_valued and y.is_single_valued):
        raise MorphError("SHAPE_MISMATCH", "proximity needs single-valued profiles over the same groups")
    return sum(a != b for (_, a), (_, b) in zip(x.choices, y.choices))


def median_scores(solutions: Sequence[SelectionProfile]) -> list[int]:
    return [sum(proximity(x, s) for s in solutions) for x in solutions]


def set_median(solutions: Sequence[SelectionProfile]) -> SelectionProfile:
    """Member minimising total proximity to all members; earliest wins ties."""
    scores = median_scores(solutions)
    if not scores:
        raise MorphError("EMPTY_INPUT", "at least one solution is required")
    return solutions[scores.index(min(scores))]
