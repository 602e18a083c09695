import pytest

from nisq_lab import topology
from nisq_lab.noise import default_calibration


@pytest.fixture(scope="session")
def graph():
    return topology.shipped_poughkeepsie()


@pytest.fixture(scope="session")
def default_cal():
    return default_calibration()
