import numpy as np
import pytest

from liftlab import manifold
from liftlab.flow_oracle import OracleSettings


@pytest.fixture(scope="session")
def euclid2():
    return manifold.euclidean(2)


@pytest.fixture(scope="session")
def polar2():
    return manifold.polar2()


@pytest.fixture(scope="session")
def sphere2():
    return manifold.sphere2()


@pytest.fixture(scope="session")
def halfplane2():
    return manifold.halfplane2()


@pytest.fixture(scope="session")
def torus2():
    return manifold.torus_flat2()


@pytest.fixture(scope="session")
def fast_oracle():
    # accuracy ~t_step^2 = 6e-8 relative; plenty for 1e-5 checks
    return OracleSettings(t_step=2.5e-4, steps=8)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
