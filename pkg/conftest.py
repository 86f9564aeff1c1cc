import numpy as np
import pytest

from src.tensor_core.kruskal import KruskalTensor, dense_from_kruskal


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_kruskal(rng):
    def make(dims=(4, 5, 6), rank=2):
        return KruskalTensor(tuple(rng.standard_normal((d, rank)) for d in dims))
    return make


@pytest.fixture
def random_lowrank(random_kruskal):
    def make(dims=(4, 5, 6), rank=2):
        return dense_from_kruskal(random_kruskal(dims, rank))
    return make
