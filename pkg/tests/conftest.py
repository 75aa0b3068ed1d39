import numpy as np
import pytest

from edgeprune import gen_synthetic

# The three reference datasets the acceptance suite runs on. Parameters
# are part of the frozen test contract; change them only together with
# the expectations that depend on them.


@pytest.fixture(scope="session")
def dataset_a():
    """Three well-separated Gaussian blobs, N=300."""
    return gen_synthetic("blobs", {"clusters": 3, "size": 100,
                                   "separation": 20.0, "spread": 1.0}, seed=11)


@pytest.fixture(scope="session")
def dataset_b():
    """Two concentric rings, N=400, modest noise, uniform linear density."""
    return gen_synthetic("circles", {"radii": [1.0, 3.0], "size": [100, 300],
                                     "noise": 0.01}, seed=23)


@pytest.fixture(scope="session")
def dataset_c():
    """One dense and one sparse blob, N=300."""
    return gen_synthetic("mixed-density", {"size_dense": 200, "size_sparse": 100,
                                           "spread_dense": 0.3, "spread_sparse": 2.0,
                                           "separation": 10.0}, seed=5)


def random_labels(rng: np.random.Generator, n: int, c: int) -> np.ndarray:
    """Random labeling that uses every id in 0..c-1 at least once."""
    labels = rng.integers(0, c, size=n)
    labels[rng.permutation(n)[:c]] = np.arange(c)
    return labels
