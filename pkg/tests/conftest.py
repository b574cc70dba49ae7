import numpy as np
import pytest

from cswv.sensing import SensingCodebook


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


@pytest.fixture(scope="session")
def codebook():
    # session-scoped so the memoized measurement matrices are shared
    return SensingCodebook()
