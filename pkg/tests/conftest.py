import numpy as np
import pytest

from skybid.bidding import UniformValuation
from skybid.neural_auction import TrainConfig, train


@pytest.fixture(scope="session")
def trained_default():
    """The documented default preset: U[0, 1], 5 bidders, K=5, J=3, k=1,
    500 iterations.  Shared across tests because training takes seconds."""
    return train(UniformValuation(0.0, 1.0), 5, TrainConfig(rng_seed=0)).params


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
