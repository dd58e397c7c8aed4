import math

import pytest

from fcswork import build_driven_qubit

TWO_PI = 2 * math.pi

# (criterion number, status, detail) lines collected by test_acceptance
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {detail}")


@pytest.fixture(scope="session")
def weak_drive_model():
    return build_driven_qubit(nu=1.0, omega=0.05, omega_d=1.0, gamma=0.007, beta=2.0)


@pytest.fixture(scope="session")
def weak_drive_time():
    return 5 * TWO_PI
