import pytest

CRITERIA: list[str] = []


@pytest.fixture
def verdict():
    """Record one pass/fail line; the lines are printed again in the terminal summary."""

    def record(n: int, name: str, ok: bool, detail: str = ""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {name}" + (f" ({detail})" if detail else "")
        CRITERIA.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
