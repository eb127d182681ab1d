import os

import pytest
from hypothesis import HealthCheck, settings

from ordidx.empirical import residue_stream

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DEGREE_GRID = [2, 3, 5, 6, -2, -3, -5, 4, -4, 8, "9/4"]
DENSITY_BASES = [2, 3, 5, 6, -2, -3, -4, 8]
DENSITY_MODULI = [2, 3, 4, 5, 6, 8, 12]

# verdict lines written by the acceptance tests, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def stream_1e6():
    return lambda g: residue_stream(g, 10**6)


@pytest.fixture(scope="session")
def stream_1e7():
    return lambda g: residue_stream(g, 10**7)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
