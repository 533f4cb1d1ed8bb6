from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from mequilibrium import fixtures

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def games():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = fixtures.load(name)
        return cache[name]
    return get


def F(a, b=1):
    return Fraction(a, b)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
