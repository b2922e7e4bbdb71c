import numpy as np
import pytest

from tests.corpus import law_named


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def rademacher():
    return law_named("rademacher")


@pytest.fixture
def quad():
    return law_named("quad")
