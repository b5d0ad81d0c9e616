import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hardylab import make_grid

settings.register_profile(
    "lab", max_examples=25, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("lab")

ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def grid1():
    """Acceptance grid: n = 1, L = 16, P = 512."""
    return make_grid(1, 16.0, 512)


@pytest.fixture(scope="session")
def grid1_wide():
    """Larger box for runs with a potential (keeps the edge band below 1e-12)."""
    return make_grid(1, 20.0, 512)


@pytest.fixture
def rng():
    return np.random.default_rng(20240229)
