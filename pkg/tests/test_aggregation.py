import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from morph.aggregation import (McpInstance, SelectionProfile, compress_superstructure, kernel,
                               mcp_exact, mcp_greedy, median_scores, proximity, set_median,
                               solve_compression, solve_extension, solve_mcp, superstructure)
from morph.errors import MorphError
from morph.synthesis import synthesize

KERNEL = {"R": (), "P": ("P.3",), "D": ("D.2",), "Q": ("Q.4",), "U": ("U.1",), "Z": (), "Y": (), "O": ()}
SUPER = {"R": ("R.3", "R.4"), "P": ("P.3",), "D": ("D.2",), "Q": ("Q.4",), "U": ("U.1",),
         "Z": ("Z.1", "Z.2"), "Y": ("Y.2", "Y.3"), "O": ("O.1", "O.2")}


@pytest.fixture(scope="module")
def roots(sensor):
    return [SelectionProfile.from_leaf_profile(s.leaf_profile) for s in synthesize(sensor).root]


@pytest.fixture(scope="module")
def order(sensor):
    return {g: i for i, g in enumerate(sensor.leaf_groups)}


def test_kernel_and_superstructure(roots, order):
    assert kernel(roots, order).as_dict() == KERNEL
    assert superstructure(roots, order).as_dict() == SUPER
    assert kernel(roots, order).issubset(superstructure(roots, order))


def test_profile_ops_need_input():
    with pytest.raises(MorphError):
        kernel([])
    a = SelectionProfile.from_mapping({"A": ["a"]})
    b = SelectionProfile.from_mapping({"B": ["b"]})
    with pytest.raises(MorphError):
        superstructure([a, b])


def extension(roots, order, items, budget, method):
    return solve_extension(kernel(roots, order), superstructure(roots, order), items, budget, method)


@pytest.mark.parametrize("method", ["greedy", "exact"])
@pytest.mark.parametrize("budget, picks, cost, profit", [
    (14, ("R.3", "Z.1", "Y.2", "O.1"), 14, 12),
    (15, ("R.4", "Z.1", "Y.2", "O.1"), 15, 13),
])
def test_extension_examples(roots, order, sensor_file, method, budget, picks, cost, profit):
    profile, sol = extension(roots, order, sensor_file.items, budget, method)
    assert sol.total_profit == profit
    if method == "greedy":
        assert sol.das == picks and sol.total_cost == cost
    assert sol.total_cost <= budget
    assert profile.is_single_valued


def test_extension_below_floor(roots, order, sensor_file):
    with pytest.raises(MorphError) as exc:
        extension(roots, order, sensor_file.items, 13, "greedy")
    assert exc.value.code == "INFEASIBLE"


def test_full_kernel_needs_no_knapsack():
    p = SelectionProfile.from_mapping({"A": ["a"], "B": ["b"]})
    assert solve_extension(p, p, {}, 0) == (p, None)


def test_compression_example(roots, order, sensor_file):
    sup = superstructure(roots, order)
    kept, sol = solve_compression(sup, sensor_file.items)
    assert kept.single() == {"R": "R.4", "P": "P.3", "D": "D.2", "Q": "Q.4", "U": "U.1",
                             "Z": "Z.1", "Y": "Y.2", "O": "O.1"}
    assert sol.total_cost == 17 and sol.total_profit == -10

    # every keep-pattern by hand
    multi = [g for g in ("R", "Z", "Y", "O")]
    best = None
    for keep in itertools.product(*(SUPER[g] for g in multi)):
        dropped = [d for g, k in zip(multi, keep) for d in SUPER[g] if d != k]
        lost = sum(sensor_file.items[d][1] for d in dropped)
        if best is None or lost < best:
            best = lost
    assert -sol.total_profit == best


def test_compression_count_mode(roots, order, sensor_file):
    sup = superstructure(roots, order)
    kept, sol = solve_compression(sup, sensor_file.items, mode="count", limit=4)
    assert kept.is_single_valued and sol.total_cost == 4
    with pytest.raises(MorphError) as exc:
        compress_superstructure(sup, sensor_file.items, mode="count", limit=3)
    assert exc.value.code == "INFEASIBLE"


def test_greedy_and_exact_on_a_tiny_instance():
    inst = McpInstance.from_table([[("a1", 1, 1), ("a2", 3, 4)], [("b1", 1, 1), ("b2", 2, 3)]], 4)
    assert mcp_exact(inst).total_profit == 5
    assert mcp_greedy(inst).total_cost <= 4


def test_decimal_costs():
    inst = McpInstance.from_table([[("a", 0.1, 1), ("b", 0.2, 2)], [("c", 0.1, 1), ("d", 0.2, 2)]], 0.3)
    assert mcp_exact(inst).total_profit == 3
    assert mcp_greedy(inst).total_profit == 3


def test_scale_exceeded():
    inst = McpInstance.from_table([[("a", 0.0001, 1)]], 1)
    with pytest.raises(MorphError) as exc:
        mcp_exact(inst)
    assert exc.value.code == "SCALE_EXCEEDED"


def test_unknown_method():
    inst = McpInstance.from_table([[("a", 1, 1)]], 1)
    with pytest.raises(MorphError):
        solve_mcp(inst, "simplex")


def brute_mcp(table, budget):
    best = None
    for combo in itertools.product(*table):
        if sum(c for _, c, _ in combo) <= budget:
            profit = sum(p for _, _, p in combo)
            best = profit if best is None else max(best, profit)
    return best


def test_random_instances_against_enumeration():
    rng = random.Random(11)
    for _ in range(150):
        table = [[(f"g{i}.{j}", rng.randint(0, 50), rng.randint(0, 50)) for j in range(rng.randint(1, 6))]
                 for i in range(rng.randint(1, 4))]
        budget = rng.randint(0, 150)
        expected = brute_mcp(table, budget)
        inst = McpInstance.from_table(table, budget)
        if expected is None:
            for solver in (mcp_exact, mcp_greedy):
                with pytest.raises(MorphError):
                    solver(inst)
            continue
        assert mcp_exact(inst).total_profit == expected
        g = mcp_greedy(inst)
        assert g.total_cost <= budget and g.total_profit <= expected


# -- proximity and median -----------------------------------------------------

def test_proximity_examples(roots):
    s1 = roots[0]
    assert proximity(s1, s1) == 0
    # swapping only R3 <-> R4 gives a neighbour
    other = {"R.3": "R.4", "R.4": "R.3"}[s1.single()["R"]]
    twin = next(r for r in roots if r.single() == {**s1.single(), "R": other})
    assert proximity(s1, twin) == 1
    assert sorted(proximity(s1, r) for r in roots) == [0, 1, 1, 2, 2, 3, 3, 4]


def test_proximity_needs_single_values():
    a = SelectionProfile.from_mapping({"A": ["a", "b"]})
    with pytest.raises(MorphError):
        proximity(a, a)


def test_median_of_sensor_solutions(roots):
    assert median_scores(roots) == [16] * 8
    assert set_median(roots) == roots[0]


def test_median_prefers_the_centre():
    rows = [{"A": "a1", "B": "b1"}, {"A": "a1", "B": "b2"}, {"A": "a2", "B": "b1"}]
    sols = [SelectionProfile.from_mapping({g: [d] for g, d in r.items()}) for r in rows]
    assert set_median(sols) == sols[0]


profiles = st.lists(st.sampled_from("abc"), min_size=4, max_size=4).map(
    lambda picks: SelectionProfile.from_mapping({f"G{i}": [p] for i, p in enumerate(picks)}))


@settings(max_examples=300, deadline=None)
@given(profiles, profiles, profiles)
def test_metric_laws(x, y, z):
    assert proximity(x, y) == proximity(y, x)
    assert (proximity(x, y) == 0) == (x == y)
    assert proximity(x, z) <= proximity(x, y) + proximity(y, z)


@settings(max_examples=200, deadline=None)
@given(st.lists(profiles, min_size=1, max_size=12))
def test_median_is_optimal(sols):
    total = lambda x: sum(proximity(x, s) for s in sols)
    assert total(set_median(sols)) == min(total(x) for x in sols)
