import sys

import pytest

from robsched.boundary import Box, BoundaryCurve, Metric
from robsched.config import load_reference
from robsched.radius import RadiusSearchParams

# thresholds shipped with the bundled scenario
PROFIT_A = 28.617223768644774
JOINT_PROFIT = 30.230405046499857
JOINT_WAIT = 0.05180491490971045
REPORTED_B = (3.7359, 2.1707)
WAIT_PARAMS = RadiusSearchParams(tol_on_curve=1e-5)


@pytest.fixture(scope="session")
def ref():
    return load_reference()


@pytest.fixture(scope="session")
def profit_curve():
    return BoundaryCurve(Metric.PROFIT, PROFIT_A, Box())


@pytest.fixture(scope="session")
def joint_curves():
    return (BoundaryCurve(Metric.PROFIT, JOINT_PROFIT, Box()),
            BoundaryCurve(Metric.MEAN_WAIT, JOINT_WAIT, Box()))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = sorted(getattr(mod, "ACCEPTANCE_LINES", []))
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
