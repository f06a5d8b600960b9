from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# filled by test_acceptance.py, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
