import numpy as np
import pytest

from qcrb.model import classical_model, example_dim2, example_dim4


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def dim2_model():
    return example_dim2(0.95, 0.1)


@pytest.fixture
def dim4_model():
    return example_dim4(0.95, 0.3)


@pytest.fixture
def classical():
    return classical_model(0.3, params=2)
