import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from opfield.fieldcore import ParameterSpace

settings.register_profile("opfield", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("opfield")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_points():
    return ParameterSpace(("t1", "t2"), [(0, 1)])


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS.values():
        terminalreporter.write_line(line)
