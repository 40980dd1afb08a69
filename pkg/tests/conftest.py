import pytest

from voalab import build_heisenberg, build_virasoro
from voalab.scalars import RatFunc
from gmpy2 import mpq


@pytest.fixture(scope="session")
def heis():
    return build_heisenberg(8)


@pytest.fixture(scope="session")
def vir_half():
    return build_virasoro(mpq(1, 2), 8)


@pytest.fixture(scope="session")
def vir_generic():
    return build_virasoro(RatFunc.t(), 8)
