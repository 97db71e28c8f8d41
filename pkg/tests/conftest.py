import numpy as np
import pytest

from secure_ura import SystemConfig, generate_public_params

from helpers import make_mini_cfg


@pytest.fixture(scope="session")
def mini_cfg():
    return make_mini_cfg()


@pytest.fixture(scope="session")
def mini_params(mini_cfg):
    return generate_public_params(mini_cfg)


@pytest.fixture(scope="session")
def full_cfg():
    return SystemConfig()


@pytest.fixture(scope="session")
def full_params(full_cfg):
    return generate_public_params(full_cfg)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
