import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from lexnav.embedding import default_store  # noqa: E402
from lexnav.gridworld import load_map  # noqa: E402


@pytest.fixture(scope="session")
def amap():
    return load_map()


@pytest.fixture(scope="session")
def store():
    return default_store()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def verdicts():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
