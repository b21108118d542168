import numpy as np
import pytest

from nbpas import ldpc
from nbpas.galois import make_field
from nbpas.mapping import make_ask


@pytest.fixture(scope="session")
def gf64():
    return make_field(6)


@pytest.fixture(scope="session")
def gf8():
    return make_field(3)


@pytest.fixture(scope="session")
def ask8():
    return make_ask(3)


@pytest.fixture(scope="session")
def code_f64_r34():
    """GF(64), n_c=96, d_c=8: the SE=1.5 PAS code shape."""
    return ldpc.construct(make_field(6), 96, 8, seed=1)


@pytest.fixture(scope="session")
def code_f64_r12():
    """GF(64), n_c=96, d_c=4: the SE=1.5 uniform code shape."""
    return ldpc.construct(make_field(6), 96, 4, seed=2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
