import numpy as np
import pytest

from nvspinmech import CrystalOrientation, FieldVector, SpinParams, TrapModel

TWO_PI = 2.0 * np.pi
DEG = np.pi / 180.0


@pytest.fixture
def params():
    """Default ensemble: 1 ppm per class, strong pumping."""
    return SpinParams()


@pytest.fixture
def orientation():
    return CrystalOrientation.identity()


@pytest.fixture
def trap():
    return TrapModel(trap_frequency=TWO_PI * 500.0, theta0=3.0 * DEG)


def axial_field(orientation, b_mag):
    """Lab field along the tracked (class 0) axis."""
    return FieldVector.from_array(b_mag * orientation.axis_lab(0), frame="lab")
