import numpy as np
import pytest

from tracelift.instances import random_matrix, random_pd


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def pd_pair(rng):
    return random_pd(3, rng), random_pd(3, rng)


@pytest.fixture
def pd_pair_real(rng):
    return random_pd(3, rng, complex_=False), random_pd(3, rng, complex_=False)


@pytest.fixture
def kab(rng):
    A = random_pd(2, rng)
    B = random_pd(2, rng)
    K = random_matrix(2, 2, rng)
    return K, A, B
