"""Collects the one-line acceptance verdicts and prints them after the run."""
import pytest

_VERDICTS: dict[int, str] = {}


@pytest.fixture
def criterion():
    """record(number, title, checks) stores one PASS/FAIL line for an
    acceptance criterion; ``checks`` is a list of (name, passed, detail)."""

    def record(number: int, title: str, checks: list[tuple[str, bool, str]]) -> bool:
        ok = bool(checks) and all(passed for _, passed, _ in checks)
        parts = "; ".join(f"{name} {'ok' if passed else 'FAILED'} ({detail})"
                          for name, passed, detail in checks)
        _VERDICTS[number] = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {parts}"
        print(_VERDICTS[number])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        terminalreporter.write_line(_VERDICTS[number])
