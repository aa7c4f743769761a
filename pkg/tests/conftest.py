import numpy as np
import pytest
import torch


@pytest.fixture(autouse=True)
def _seed_torch():
    torch.manual_seed(0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rand_image(rng, size: int) -> np.ndarray:
    return rng.random((size, size, 3), dtype=np.float32)
