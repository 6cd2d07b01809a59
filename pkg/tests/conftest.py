import pytest

from freefield.cdr import build_structure
from freefield.coeffs import Mode
from freefield.engine import clear_cache
from freefield.states import System


@pytest.fixture(autouse=True)
def _fresh_products():
    clear_cache()
    yield


@pytest.fixture
def heis1():
    return System.make("heis", 1)


@pytest.fixture
def heis2():
    return System.make("heis", 2)


@pytest.fixture
def cliff1():
    return System.make("cliff", 1)


@pytest.fixture
def omega1():
    return System.make("omega", 1)


@pytest.fixture
def omega2():
    return System.make("omega", 2)


@pytest.fixture
def laurent1():
    return System.make("heis", 1, Mode.RATIONAL)


@pytest.fixture
def series_omega1():
    return System.make("omega", 1, Mode.SERIES, 6)


@pytest.fixture
def structure1(omega1):
    return build_structure(omega1)
