import pytest

from oracles import cantor_instance, identity_instance, sierpinski_instance


@pytest.fixture
def cantor():
    return cantor_instance()


@pytest.fixture(scope="session")
def sierpinski():
    return sierpinski_instance()


@pytest.fixture
def identity():
    return identity_instance()
