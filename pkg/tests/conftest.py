import pytest

from sbpkit.grids import ProblemParams, make_grid


@pytest.fixture(scope="session")
def grid512():
    return make_grid(40.0, 512)


@pytest.fixture(scope="session")
def grid1024():
    return make_grid(40.0, 1024)


@pytest.fixture(scope="session")
def grid2048():
    return make_grid(40.0, 2048)


@pytest.fixture(scope="session")
def params_default():
    return ProblemParams(p=2.5, a=1.0, omega=1.0)


@pytest.fixture(scope="session")
def params_coulomb():
    return ProblemParams(p=2.5, a=0.0, omega=1.0)


@pytest.fixture(scope="session")
def params_cubic():
    return ProblemParams(p=3.0, a=1.0, omega=1.0)
