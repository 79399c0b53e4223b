import pytest

from antiplane import LatticeDomain


@pytest.fixture(scope="session")
def dom8():
    return LatticeDomain(8)


@pytest.fixture(scope="session")
def dom16():
    return LatticeDomain(16)
