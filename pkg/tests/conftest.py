import numpy as np
import pytest

from singletcool import SpinSystemParams


@pytest.fixture
def default_params() -> SpinSystemParams:
    return SpinSystemParams()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


def random_populations(rng: np.random.Generator, n: int) -> np.ndarray:
    """n random strictly-valid population vectors, rows summing to 1."""
    raw = rng.random((n, 4)) + 1e-6
    return raw / raw.sum(axis=1, keepdims=True)
