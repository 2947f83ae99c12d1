import numpy as np
import pytest
from hypothesis import settings

from istnsim.channel import RadioConstants
from istnsim.scenario import hex_scenario

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture
def small_scenario():
    """7 sites, 60 users, 2 LEOs, centre site down."""
    return hex_scenario(rings=1, isd=2000.0, n_users=60, n_leos=2, outage=[0], seed=3,
                        constants=RadioConstants(rssi_mode="signal"))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from oracles import ACCEPTANCE_LINES
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
