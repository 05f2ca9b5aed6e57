import numpy as np
import pytest

from dynspect import sbm


@pytest.fixture(scope="session")
def synthetic1_probs():
    """Noise-free synthetic1 at n=200 with the labels of seed 0."""
    s = sbm.sample(sbm.synthetic_preset("synthetic1", n=200, seed=0))
    return s.labels, s.probability_matrices


@pytest.fixture
def path3():
    return np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)


@pytest.fixture
def k2():
    return np.array([[0, 1], [1, 0]], dtype=float)
