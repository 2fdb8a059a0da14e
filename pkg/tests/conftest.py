import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from istdkit.priors import build_kernel_bank


@pytest.fixture(scope="session")
def bank():
    return build_kernel_bank()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
