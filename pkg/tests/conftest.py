import math
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from anosov_tangent.torus import FIBONACCI, TorusPoint, TrigPoly, eigen_decompose

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("default")


@pytest.fixture(scope="session")
def auto():
    return eigen_decompose(FIBONACCI)


@pytest.fixture(scope="session")
def f1():
    """One harmonic: f(x) = (cos x1, cos x1)."""
    return TrigPoly({(1, 0): [0.5, 0.5], (-1, 0): [0.5, 0.5]})


@pytest.fixture(scope="session")
def f2():
    """Two harmonics with complex coefficients."""
    return TrigPoly({(1, 0): [0.5, 0.2j], (-1, 0): [0.5, -0.2j],
                     (0, 1): [0.3 - 0.1j, 0.4], (0, -1): [0.3 + 0.1j, 0.4]})


@pytest.fixture(scope="session")
def f3():
    """Three harmonic pairs including a diagonal frequency."""
    return TrigPoly({(1, 0): [0.5, 0.2j], (-1, 0): [0.5, -0.2j],
                     (0, 1): [0.3 - 0.1j, 0.4], (0, -1): [0.3 + 0.1j, 0.4],
                     (1, 1): [0.1, 0.1], (-1, -1): [0.1, 0.1]})


@pytest.fixture(scope="session")
def zero():
    return TrigPoly.zero()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_points(n, seed=0):
    r = np.random.default_rng(seed)
    return [TorusPoint(float(a), float(b)) for a, b in r.uniform(0, 2 * math.pi, (n, 2))]


@pytest.fixture(autouse=True)
def _quiet_radius_warning():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*radius.*", category=RuntimeWarning)
        yield
