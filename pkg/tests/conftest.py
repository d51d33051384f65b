from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


def read_table1():
    """Rows of the reference window table: phase -> per-kernel (u text, window text, cost)."""
    rows = {}
    for line in (DATA / "table1.txt").read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split("|")]
        phase = int(cells[0])
        rows[phase] = {
            "K1": (cells[1], cells[2], int(cells[3])),
            "K2": (cells[4], cells[5], int(cells[6])),
        }
    return rows


@pytest.fixture(scope="session")
def table1():
    return read_table1()


# acceptance criteria report: one line per criterion in the terminal summary
ACCEPTANCE: dict[int, str] = {}


class criterion:
    """Record PASS/FAIL for an acceptance criterion; failures are re-raised."""

    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        detail = self.detail if exc_type is None else f"{exc_type.__name__}: {exc}".splitlines()[0]
        line = f"criterion {self.number} [{status}] {self.title}"
        ACCEPTANCE[self.number] = line + (f" -- {detail}" if detail else "")
        print(ACCEPTANCE[self.number])
        return False


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
