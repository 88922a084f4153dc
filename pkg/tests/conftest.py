import pytest

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance():
    """Record a criterion outcome; the lines are printed in the terminal summary."""
    def record(criterion, name, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        _ACCEPTANCE.append(f"[{status}] criterion {criterion}: {name}" + (f" ({detail})" if detail else ""))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
