import pytest

_VERDICTS_KEY = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record a one-line pass/fail result for the acceptance summary."""
    lines = request.config.stash.setdefault(_VERDICTS_KEY, [])

    def record(criterion: str, ok: bool, detail: str) -> bool:
        lines.append((criterion, f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}"))
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_VERDICTS_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
