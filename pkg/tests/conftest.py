import math

import numpy as np
import pytest

from stokes_resolvent.grid_fourier import HalfGrid, NormalGrid, TangentialGrid
from stokes_resolvent.spectral_core import FluidParams, SectorSpec

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def params():
    return FluidParams()


@pytest.fixture(scope="session")
def sector():
    return SectorSpec(math.pi / 4)


@pytest.fixture(scope="session")
def grid():
    return HalfGrid()


@pytest.fixture(scope="session")
def small_grid():
    return HalfGrid(TangentialGrid(8.0, 64), NormalGrid(8.0, 64))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
