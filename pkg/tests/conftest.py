import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(ok, detail)`` then assert ``ok``."""

    def record(ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {request.node.name}: {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
