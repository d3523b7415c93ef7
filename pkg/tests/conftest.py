import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lpvmor import example_model  # noqa: E402
from lpvmor.model import random_model  # noqa: E402


@pytest.fixture(scope="session")
def example():
    return example_model()


@pytest.fixture
def rng():
    return np.random.default_rng(20150101)


@pytest.fixture
def small_model(rng):
    return random_model(rng, n_x=4, n_u=2, n_y=1, n_p=2)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
