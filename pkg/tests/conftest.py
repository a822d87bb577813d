import numpy as np
import pytest

from centrafit.data import WeightedSample
from centrafit.models import ExponentialModel


@pytest.fixture
def exp_model():
    return ExponentialModel()


def random_sample(seed, n=None, with_densities=False, theta_true=1.0, noise=0.0):
    """Small sample with exponential-like points and random weights.

    Points are clipped into [0.05, 8] so log densities stay well scaled
    (the alpha -> 0 limit checks assume bounded log spreads).
    """
    rng = np.random.default_rng(seed)
    if n is None:
        n = int(rng.integers(2, 13))
    x = np.clip(rng.exponential(1.0, n), 0.05, 8.0)
    w = rng.random(n) + 0.05
    w = w / w.sum()
    densities = None
    if with_densities:
        densities = theta_true * np.exp(-theta_true * x)
        if noise:
            densities = densities * (1.0 + noise * rng.standard_normal(n))
            densities = np.clip(densities, 0.0, None)
    return WeightedSample(x, w, densities)


def rel_err(a, b, floor=1.0):
    """|a - b| over a floored magnitude, so near-zero targets stay testable."""
    return abs(a - b) / max(floor, abs(a), abs(b))
