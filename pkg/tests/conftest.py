import numpy as np
import pytest

from brittle_limit.models.params import ModelParams


@pytest.fixture
def params():
    """lambda_w = mu_w = lambda_s = mu_s = kappa = alpha = 1, eta = alpha eps."""
    return ModelParams()


@pytest.fixture
def soft_params():
    return ModelParams(lambda_w=0.5, mu_w=0.8, lambda_s=2.0, mu_s=3.0, kappa=0.7, alpha=1.3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)
