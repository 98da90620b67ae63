import pytest

from cuspspin import construction


@pytest.fixture(scope="session")
def geo():
    return construction.geometry()


@pytest.fixture(scope="session")
def built():
    return construction.build_all()
