"""Shared fixtures and the end-of-run acceptance report.

Acceptance tests append one PASS/FAIL line per criterion; the terminal
summary hook re-prints them after the pytest tally so the lines survive
output capture.
"""

import pytest

from kickecho.params import rb85_params

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def params():
    """Rb-85 at 780 nm, the reference configuration for every test."""
    return rb85_params()


@pytest.fixture(scope="session")
def acceptance_report():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
