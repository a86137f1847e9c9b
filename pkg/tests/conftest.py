import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, passed: bool, text: str) -> None:
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
