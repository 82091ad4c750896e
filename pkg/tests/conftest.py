import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from maltsev_kan import algebra as A
from maltsev_kan.simplicial import (circle_free_mod, constant, multiply_hom,
                                    nerve_abelian, reduction_hom)

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def nerve4_2():
    return nerve_abelian(4, 2)


@pytest.fixture(scope="session")
def nerve2_3():
    return nerve_abelian(2, 3)


@pytest.fixture(scope="session")
def reduction4_2():
    return reduction_hom(4, 2, 2)


@pytest.fixture(scope="session")
def doubling2_2():
    return multiply_hom(2, 4, 2)


@pytest.fixture(scope="session")
def circle2_2():
    return circle_free_mod(2, 2)


@pytest.fixture(scope="session")
def circle3_3():
    return circle_free_mod(3, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def const_z2():
    return constant(A.zmod_add(2), 2)
