import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from chebli import coefficients as co
from chebli import spectral as sp

settings.register_profile(
    "chebli", max_examples=25, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "chebli"))


BESSEL_HALF = co.CoefficientModel.bessel(0.5)
STEP_MODEL = co.CoefficientModel.perturbed_bessel(0.5, [(2.0, 3.0)])

CATALOG = [
    co.CoefficientModel.bessel(0.0),
    co.CoefficientModel.bessel(0.5),
    co.CoefficientModel.bessel(1.0),
    co.CoefficientModel.bessel(2.5),
    co.CoefficientModel.jacobi(0.5, 0.5),
    co.CoefficientModel.jacobi(1.0, 0.0),
    co.CoefficientModel.jacobi(0.0, 0.0),
    co.CoefficientModel.perturbed_bessel(0.5, [(2.0, 3.0)]),
    co.CoefficientModel.perturbed_bessel(1.0, [(1.5, 1.0), (3.0, 2.0)]),
]


@pytest.fixture(scope="session")
def spec_cache():
    cache = {}

    def get(model, t_max=sp.DEFAULT_TMAX):
        key = (model, t_max)
        if key not in cache:
            cache[key] = sp.calibrate_plancherel(model, t_max=t_max)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def bessel_half_spec(spec_cache):
    return spec_cache(BESSEL_HALF)


@pytest.fixture(scope="session")
def step_spec(spec_cache):
    return spec_cache(STEP_MODEL)


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)
