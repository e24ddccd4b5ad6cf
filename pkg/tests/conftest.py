import math

import numpy as np
import pytest

from ernst_lax.ernst import catalog_solution
from ernst_lax.grid import make_grid

CRITERIA_LINES = []


def order(coarse, fine, ratio=2.0):
    return math.log(coarse / fine) / math.log(ratio)


def margin(grid):
    return max(2, (grid.n_rho - 1) // 10)


@pytest.fixture(scope="session")
def grid_pair():
    coarse = make_grid(((0.5, 2.5), (-1.0, 1.0)), (51, 51))
    return coarse, coarse.refined(2)


@pytest.fixture(scope="session")
def curzon_pair(grid_pair):
    return [catalog_solution("curzon", {"m": 1.0}, g) for g in grid_pair]


@pytest.fixture(scope="session")
def curzon_pair_101():
    coarse = make_grid(((0.5, 2.5), (-1.0, 1.0)), (101, 101))
    return [catalog_solution("curzon", {"m": 1.0}, g) for g in (coarse, coarse.refined(2))]


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)
