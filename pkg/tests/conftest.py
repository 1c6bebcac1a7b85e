import pytest

from kolcorr.seqcore import Params

ODD_PAIRS = [(1, 2), (2, 3), (1, 4), (3, 4), (2, 5), (1, 6)]


@pytest.fixture
def p12():
    return Params(1, 2)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one summary line per acceptance criterion; printed at the end of the run."""

    def emit(criterion: int, ok: bool | None, detail: str) -> None:
        status = "REPORT" if ok is None else ("PASS" if ok else "FAIL")
        line = f"criterion {criterion:2d}: {status}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
