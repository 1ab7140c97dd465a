import pytest

_LINES = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Record a one-line PASS/FAIL verdict, repeated in the terminal summary."""
    lines = request.config.stash.setdefault(_LINES, [])

    def emit(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        lines.append(line)
        print(line)

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance verdicts")
        for line in lines:
            terminalreporter.write_line(line)
