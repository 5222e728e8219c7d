import math

import pytest
from hypothesis import settings

from genexp.core import UNCERTIFIED, build_map
from genexp.curve import CurveSpec, build_curve
from genexp.growth import GrowthSpec, build_growth

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

TWO_PI = 2.0 * math.pi


def exp_circle_map(a=5.0):
    return build_map(build_curve(CurveSpec.unit_circle()), build_growth(GrowthSpec.exponential()), a)


def diamond_map(a=7.0, mode="certified"):
    return build_map(build_curve(CurveSpec.diamond()), build_growth(GrowthSpec.exponential()), a, mode=mode)


@pytest.fixture(scope="session")
def exp_circle():
    return exp_circle_map()


@pytest.fixture(scope="session")
def diamond():
    return diamond_map()


@pytest.fixture(scope="session")
def diamond_fig():
    return diamond_map(2.0, UNCERTIFIED)


@pytest.fixture(scope="session", params=["exp_circle", "diamond"])
def any_map(request):
    return request.getfixturevalue(request.param)


def newton(fun, dfun, x, steps=60):
    for _ in range(steps):
        x = x - fun(x) / dfun(x)
    return x


ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
