import numpy as np
import pytest

from warren.oracles import RngStream


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run full-size acceptance tests"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size Monte Carlo acceptance runs")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def gen() -> np.random.Generator:
    return RngStream(20240917).generator()
