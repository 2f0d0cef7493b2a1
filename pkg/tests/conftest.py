import numpy as np
import pytest

from hopfwatt.hopf import make_frame, run_ladder
from hopfwatt.wgss import WgssParams, analytic_jet

from reference_values import Q_ROUNDED


@pytest.fixture(scope="session")
def q_params():
    return WgssParams.critical(**Q_ROUNDED)


@pytest.fixture(scope="session")
def q_jet(q_params):
    return analytic_jet(q_params)


@pytest.fixture(scope="session")
def q_ladder(q_jet):
    return run_ladder(make_frame(q_jet), up_to=4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
