import pytest

from heckephi.acceptance import Bundle


@pytest.fixture(scope="session")
def bundle():
    return Bundle(seed=0)


@pytest.fixture(scope="session")
def K(bundle):
    return bundle.K


@pytest.fixture(scope="session")
def G(bundle):
    return bundle.G


@pytest.fixture(scope="session")
def F7(bundle):
    return bundle.F7


@pytest.fixture(scope="session")
def chi3(bundle):
    return bundle.chi3


@pytest.fixture(scope="session")
def ctx7(bundle):
    return bundle.ctx7


@pytest.fixture(scope="session")
def ev7(bundle):
    return bundle.ev7


@pytest.fixture(scope="session")
def F0(bundle):
    return bundle.F0


@pytest.fixture(scope="session")
def chi0(bundle):
    return bundle.chi0


@pytest.fixture(scope="session")
def ctx0(bundle):
    return bundle.ctx0


@pytest.fixture(scope="session")
def ev0(bundle):
    return bundle.ev0
