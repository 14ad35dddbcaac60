import sys
from pathlib import Path

import numpy as np
import pytest

SRC_DIR = Path(__file__).resolve().parents[1] / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

from core.config import paper_defaults  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long statistical oracles (still run by default)")


@pytest.fixture(scope="session")
def paper_config():
    return paper_defaults()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
