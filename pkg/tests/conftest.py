import numpy as np
import pytest

from stakepool import GameParams, Uniform


@pytest.fixture
def uniform():
    return Uniform()


@pytest.fixture
def base_params():
    return GameParams(H=1.0, M=0.5, R=1.0, lam=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance_line():
    """Record the one-line verdict of an acceptance criterion."""
    def record(number: int, ok: bool, text: str):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {text}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
