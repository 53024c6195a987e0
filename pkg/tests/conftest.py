import numpy as np
import pytest

from pleaders import daubechies_filter


@pytest.fixture(scope="session")
def db1():
    return daubechies_filter(1)


@pytest.fixture(scope="session")
def db2():
    return daubechies_filter(2)


@pytest.fixture(scope="session")
def db4():
    return daubechies_filter(4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
