import pytest

_LINES: list[str] = []


@pytest.fixture
def acceptance_report(capsys):
    """Print and remember one pass/fail line per acceptance criterion."""

    def report(k: int, ok: bool, detail: str) -> bool:
        line = f"criterion {k}: {'PASS' if ok else 'FAIL'} ({detail})"
        _LINES.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
