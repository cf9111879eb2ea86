from __future__ import annotations

import pytest

from mixpop import example1
from mixpop.population import State

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def spec():
    return example1()


def S(*values, b: int = 4) -> State:
    """Example-1 state from its nine canonical coordinates."""
    return State.from_canonical(values, b)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
