import random

import pytest

from morph.model import CompatibilityMatrix, build_model
from morph.modelfile import load_sensor


@pytest.fixture(scope="session")
def sensor_file():
    return load_sensor()


@pytest.fixture(scope="session")
def sensor(sensor_file):
    return sensor_file.model


def random_flat_model(rng: random.Random, max_groups=5, max_das=6, k=3, l=3, zero_rate=0.25):
    """Root directly over 1..max_groups groups, random priorities and compat."""
    n_groups = rng.randint(1, max_groups)
    groups = {}
    for g in range(1, n_groups + 1):
        groups[f"G{g}"] = [(f"G{g}.{j}", rng.randint(1, k)) for j in range(1, rng.randint(1, max_das) + 1)]
    if n_groups == 1:
        return build_model("G1", k, l, groups)
    entries = {}
    names = list(groups)
    for i, gi in enumerate(names):
        for gj in names[i + 1:]:
            for a, _ in groups[gi]:
                for b, _ in groups[gj]:
                    entries[(a, b)] = 0 if rng.random() < zero_rate else rng.randint(1, l)
    return build_model("ROOT", k, l, groups, {"ROOT": names},
                       [CompatibilityMatrix("ROOT", entries)])


# -- acceptance summary ------------------------------------------------------

_criteria = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _criteria.append((marker.args[0], marker.args[1], rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for cid, text, outcome in sorted(_criteria, key=lambda c: int(c[0][2:])):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {cid} {text}")
