"""Shared fixtures plus the acceptance report summary hook."""

import pytest

# Populated by tests/test_acceptance.py as criteria pass; printed at the end
# of the session so every gate shows one visible line in the test output.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance gate")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(1234)
