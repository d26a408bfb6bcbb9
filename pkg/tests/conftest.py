import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ylab import instance_from_points

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def square():
    return instance_from_points([(0, 0), (1, 0), (1, 1), (0, 1)], name="square")


@pytest.fixture
def tri345():
    return instance_from_points([(0, 0), (3, 0), (0, 4)], name="tri345")


def regular_polygon(k, radius=1.0, centre=False):
    pts = [(radius * math.cos(2 * math.pi * i / k), radius * math.sin(2 * math.pi * i / k))
           for i in range(k)]
    if centre:
        pts.append((0.0, 0.0))
    return instance_from_points(pts, name=f"polygon{k}")


def random_points(rng, n):
    return rng.random((n, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


# -- acceptance report ------------------------------------------------------

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        # parametrised checks of one criterion: all cases must pass
        _, ok, seconds = _criteria.get(number, (title, True, 0.0))
        _criteria[number] = (title, ok and report.outcome == "passed", seconds + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok, seconds = _criteria[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {number:>2}. {title}  ({seconds:.2f}s)")
