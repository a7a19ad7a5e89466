import numpy as np
import pytest

from timebin_rejection.checks import random_noise
from timebin_rejection.state import QubitState


@pytest.fixture
def rng():
    return np.random.default_rng(20071016)


def random_qubit(rng):
    return QubitState.random(rng)


def random_params(rng):
    return random_noise(rng)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    def add(number, title, passed, detail):
        ACCEPTANCE_LINES.append(
            f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title}: {detail}")
        return passed
    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
