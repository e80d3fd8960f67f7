import pytest

_CRITERIA = {}


@pytest.fixture
def record_criterion():
    """Store a one-line outcome for an acceptance criterion."""

    def record(number, passed, text):
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {text}"
        _CRITERIA[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
