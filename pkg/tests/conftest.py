import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def int_bits(v, width):
    return np.array([(v >> (width - 1 - t)) & 1 for t in range(width)], dtype=np.uint8)
