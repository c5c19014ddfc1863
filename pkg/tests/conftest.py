import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from extension_energy import fourier_table, lebesgue, middle_thirds_cantor, ninth_cantor, quarter_cantor

settings.register_profile(
    "artifact", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("artifact")


@pytest.fixture(scope="session")
def quarter():
    return quarter_cantor()


@pytest.fixture(scope="session")
def leb():
    return lebesgue()


@pytest.fixture(scope="session")
def thirds():
    return middle_thirds_cantor()


@pytest.fixture(scope="session")
def ninth():
    return ninth_cantor()


@pytest.fixture(scope="session")
def quarter_table(quarter):
    return fourier_table(quarter, 2**15)


@pytest.fixture(scope="session")
def leb_table(leb):
    return fourier_table(leb, 2**13)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
