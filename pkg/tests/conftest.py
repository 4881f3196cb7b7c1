import math

import pytest

from pvradar.analytic import NetworkScenario
from pvradar.circumradius import CircumradiusDistribution


@pytest.fixture(scope="session")
def scenario():
    """Reference deployment at 0.1 BS/km^2 and a 5 km exclusion zone."""
    return NetworkScenario.reference_deployment(0.1, 5.0)


@pytest.fixture(scope="session")
def dist(scenario):
    return CircumradiusDistribution(scenario.intensity_bs)


def db(x):
    return 10.0 * math.log10(x)
