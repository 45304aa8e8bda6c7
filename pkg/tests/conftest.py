import numpy as np
import pytest
from click.testing import CliRunner

from sinetype.settings import settings


# small windows keep the oracle fast; every tolerance below is window independent
@pytest.fixture(scope="session")
def cfg():
    return settings.updated(N=32, K=16, n_max=16)


# the shipped defaults: N = 256, n_max = 64
@pytest.fixture(scope="session")
def full_cfg():
    return settings.updated(N=256, K=16, n_max=64)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture()
def runner():
    return CliRunner()
