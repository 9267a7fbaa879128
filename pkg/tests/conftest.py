import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from extcat.fixtures import fixture


@pytest.fixture(scope="session")
def win4():
    return fixture("win4").model


@pytest.fixture(scope="session")
def ex5_1():
    return fixture("ex5_1")


@pytest.fixture(scope="session")
def ex5_2():
    return fixture("ex5_2")


@pytest.fixture(scope="session")
def ex5_3():
    return fixture("ex5_3")


@pytest.fixture(scope="session")
def modA2():
    return fixture("modA2").model


@pytest.fixture(scope="session")
def modA4():
    return fixture("modA4").model
