import numpy as np
import pytest

from suffquant.model import build_model, from_joint


@pytest.fixture
def diag4():
    """theta uniform on 4 values, X1 = X2 = theta."""
    j = np.zeros((4, 4, 4))
    j[np.arange(4), np.arange(4), np.arange(4)] = 0.25
    return from_joint(4, 4, 4, j)


@pytest.fixture
def profile_model():
    """Binary theta, x1 likelihoods (.4,.1,.4,.1) / (.1,.4,.1,.4), singleton x2."""
    lik = np.array([[0.4, 0.1, 0.4, 0.1], [0.1, 0.4, 0.1, 0.4]])
    return from_joint(2, 4, ("*",), (0.5 * lik)[:, :, None])


@pytest.fixture
def bsc_model():
    """theta uniform on {0,1}; each x_i equals theta with probability 0.8, independently."""
    k = np.array([[0.8, 0.2], [0.2, 0.8]])
    return build_model(2, 2, 2, prior=[0.5, 0.5], kernels={"x1|theta": k, "x2|theta": k})
