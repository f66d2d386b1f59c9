import numpy as np
import pytest
from hypothesis import settings

from haptosim.model import Grid2D, ModelParams, State

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


def gaussian_bump(g: Grid2D, amp=(1.0, 0.5, 0.8), width=0.15, center=(0.5, 0.5)) -> State:
    X, Y = g.centers()
    b = np.exp(-((X - center[0]) ** 2 + (Y - center[1]) ** 2) / (2 * width ** 2))
    return State(amp[0] * b, amp[1] * b, amp[2] * b)


@pytest.fixture
def unit_params():
    return ModelParams(chi=1.0, xi=1.0, mu=1.0, eta=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE = []


def record_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    ACCEPTANCE.append((number, f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {title} :: {detail}"))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
