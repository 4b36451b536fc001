import numpy as np
import pytest

from kernelafa.game import additive_game, make_game

# masks ordered empty, {1}, {2}, {1,2}, {3}, {1,3}, {2,3}, {1,2,3}
G2_VALUES = [0, 1, 3, 6]
G3_VALUES = [0, 0, 0, 1, 0, 1, 0, 1]


@pytest.fixture
def g2():
    return make_game(2, G2_VALUES)


@pytest.fixture
def g3():
    return make_game(3, G3_VALUES)


@pytest.fixture
def gadd():
    return additive_game(10.0, [1.0, 2.0, 3.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
