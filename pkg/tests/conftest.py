import random

import pytest

from rnet.models import ModelSpec, build_model
from rnet.network import Potential

CRITERIA = {
    1: "finite Gauss-Green on random networks",
    2: "truncation Gauss-Green split on built-in models",
    3: "charge balance of the GEO_INT monopole",
    4: "GEO_INT monopole against closed form",
    5: "free and wired resistances",
    6: "Royden decomposition orthogonality",
    7: "harmonic boundary representation",
    8: "transience and Harm-dimension classification",
    9: "Wiener identities by Monte Carlo",
    10: "boundary integral by Monte Carlo",
    11: "boundary counting and functionals",
    12: "dipole as resistance times hitting probability",
    13: "binary tree h_x limits along two ends",
}

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    n = getattr(report, "criterion", None)
    if n is None:
        return
    failed = report.failed
    if report.when == "call" or failed:
        _outcomes[n] = _outcomes.get(n, True) and not failed


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        report.criterion = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        if n in _outcomes:
            status = "PASS" if _outcomes[n] else "FAIL"
        else:
            status = "NOT RUN"
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {CRITERIA[n]}")


def model(name, **params):
    return build_model(ModelSpec(name, params))


def random_potential(net, seed, scale=1.0):
    rng = random.Random(seed)
    verts = net.vertices()
    return Potential({x: rng.uniform(-scale, scale) for x in verts}, verts[0])


@pytest.fixture
def geo_int():
    return model("GEO_INT")
