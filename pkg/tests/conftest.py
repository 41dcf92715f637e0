import numpy as np
import pytest

from torusrot.core import MZLift


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: runs longer than a few seconds")


@pytest.fixture
def mz():
    return MZLift(0.5, 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_addoption(parser):
    parser.addoption("--update-golden", action="store_true", help="rewrite the golden images instead of comparing")


@pytest.fixture
def update_golden(request):
    return request.config.getoption("--update-golden")
