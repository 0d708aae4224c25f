import numpy as np
import pytest

from vscc.data_model import Dataset, Partition


def planted(n_per=100, sep=5.0, p_signal=2, p_noise=0, seed=0):
    """Two spherical unit-variance clouds at +-sep on the signal columns, plus N(0,1) noise."""
    rng = np.random.default_rng(seed)
    labels = np.repeat([1, 2], n_per)
    sig = rng.standard_normal((2 * n_per, p_signal)) + np.where(labels[:, None] == 1, -sep, sep)
    noise = rng.standard_normal((2 * n_per, p_noise))
    names = [f"s{j + 1}" for j in range(p_signal)] + [f"n{j + 1}" for j in range(p_noise)]
    return Dataset(np.hstack([sig, noise]), names), Partition(labels, 2)


@pytest.fixture
def two_clouds():
    return planted()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
