import numpy as np
import pytest
from hypothesis import settings

from gkdv import GridSpec, ProblemSpec

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")


@pytest.fixture
def grid():
    return GridSpec(20.0, 256, 33)


@pytest.fixture
def gaussian(grid):
    return np.exp(-grid.x ** 2)


@pytest.fixture
def dissipative():
    # (-1)^(n+k) b_2k > 0 for n = 1
    return ProblemSpec(1, (-0.3, 0.2))


_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(k, title, measured, target, passed)``."""

    def record(k, title, measured, target, passed):
        line = f"criterion {k:>2}: {'PASS' if passed else 'FAIL'}  {title}  measured={measured}  target={target}"
        _ACCEPTANCE.append((k, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
