import pytest

ACCEPTANCE_LINES = {}


@pytest.fixture
def accept():
    """Record one pass/fail line for an acceptance criterion."""

    def record(number, passed, detail):
        line = f"[criterion {number}] {'PASS' if passed else 'FAIL'}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
