"""Shared fixtures plus the acceptance summary hook.

test_acceptance.py records one line per criterion through the `acceptance`
fixture; the terminal summary prints them after the run so the pass/fail
status of every criterion is visible in one block regardless of -q/-v.
"""

import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Recorder: call with (number, passed, detail) before asserting."""

    def record(number: int, passed: bool, detail: str) -> None:
        status = "PASS" if passed else "FAIL"
        _ACCEPTANCE_LINES.append((number, f"criterion {number:2d} {status}  {detail}"))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
