import sys
import numpy as np
import pytest
from hypothesis import settings

from helins.initial_data import make_abc, random_solenoidal
from helins.spectral import Grid, SpectralVectorField

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid16():
    return Grid(16)


@pytest.fixture(scope="session")
def grid32():
    return Grid(32)


@pytest.fixture
def rand32(grid32):
    return random_solenoidal(grid32, seed=11, amplitude=3.0, plus_fraction=0.3)


@pytest.fixture
def abc16(grid16):
    return make_abc(1.0, 1.0, 1.0, grid16)


def real_field(grid, fn):
    """Sample ``fn(x, y, z) -> (3, ...)`` on the grid and transform."""
    x, y, z = grid.mesh()
    return SpectralVectorField.from_real(grid, np.stack(fn(x, y, z)))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
