import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hkgl.geometry import Circle, FlatTorus, Sphere

settings.register_profile(
    "hkgl", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("hkgl")

MANIFOLDS = [Circle(1.0), Circle(2.0), Sphere(1.0), Sphere(1.5), FlatTorus(1.0, 0.5)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
