import pytest

RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; returns the verdict so tests can assert on it."""
    def record(name: str, ok: bool, detail: str = "") -> bool:
        RESULTS.append((name, bool(ok), detail))
        return bool(ok)
    return record


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    passed = sum(ok for _, ok, _ in RESULTS)
    terminalreporter.write_line(f"{passed}/{len(RESULTS)} criteria passed")
