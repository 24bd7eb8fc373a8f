"""Shared fixtures: acceptance-criterion reporting.

Every acceptance test records exactly one [PASS]/[FAIL] line with its
measured values; the lines are echoed in the terminal summary so a full
run ends with the complete scoreboard.
"""

import pytest

_CRITERION_LINES: list[str] = []


@pytest.fixture
def criterion():
    def record(number: int, passed: bool, detail: str) -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
        _CRITERION_LINES.append(line)
        print(line)
        assert passed, line
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERION_LINES:
            terminalreporter.write_line(line)
