from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def apache_csv():
    return DATA / "Apache_2k.log_structured.csv"


@pytest.fixture
def mixed_csv():
    return DATA / "Mixed_2k.log_structured.csv"


CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the summary prints them all at the end."""

    def record(name: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
        CRITERIA.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
