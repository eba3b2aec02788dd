import numpy as np
import pytest

from minkval.harmonics import HarmonicExpansion, SphereGrid
from minkval.valuation import ellipsoid_kernel


@pytest.fixture(scope="session")
def grid():
    return SphereGrid.for_degree(48)


@pytest.fixture(scope="session")
def small_grid():
    return SphereGrid.for_degree(12)


@pytest.fixture(scope="session")
def smooth_kernel():
    return ellipsoid_kernel(3, 1.5, 1.0)


def random_expansion(rng, degree, pad=None, with_mean=True):
    c = rng.normal(size=(degree + 1) ** 2)
    if not with_mean:
        c[0] = 0.0
    e = HarmonicExpansion(3, degree, c)
    return e.pad(pad) if pad else e


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
