from fractions import Fraction

import numpy as np
import pytest

from cvmse.core.config import get_settings
from cvmse.models.sample import FiniteDistribution


@pytest.fixture
def half():
    return FiniteDistribution.bernoulli(Fraction(1, 2))


@pytest.fixture
def third():
    return FiniteDistribution.bernoulli(Fraction(1, 3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    monkeypatch.delenv("CVMSE_THREADS", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
