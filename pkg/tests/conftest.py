import numpy as np
import pytest
from hypothesis import settings

from relaxnet.diagram import QuadraticDiagram

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def quad():
    return QuadraticDiagram()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
