import numpy as np
import pytest

from classicality.classical import ClassicalData, get_system
from classicality.grids import GridAxis, GridState, make_gaussian


@pytest.fixture(scope="session")
def ho_system():
    return get_system("harmonic_oscillator")


@pytest.fixture(scope="session")
def coupled_system():
    return get_system("coupled_qp2", m=1.0, M=2.0, k=0.1)


@pytest.fixture
def ho_axis(ho_system):
    return GridAxis(ho_system.phase_space[0], 1024, -16.0, 16.0)


@pytest.fixture
def ho_gaussian(ho_axis):
    return make_gaussian(1.0, 0.0, 0.5, ho_axis, 1.0)


@pytest.fixture
def ho_data():
    return ClassicalData((1.0, 0.0), (1.5, 1.5))


def random_state(axis, rng, smooth=0):
    """Normalized state with pseudo-random amplitudes; ``smooth`` > 0 tames the
    boundary by windowing, keeping quadrature warnings away."""
    amp = rng.normal(size=axis.points) + 1j * rng.normal(size=axis.points)
    if smooth:
        x = axis.positions()
        center = 0.5 * (axis.lower + axis.upper)
        half = 0.5 * (axis.upper - axis.lower)
        amp = amp * np.exp(-((x - center) / (half / smooth)) ** 2)
    return GridState((axis,), amp).normalized()
