import numpy as np
import pytest
from hypothesis import settings

from lpbounds import Povm
from lpbounds.randgen import RngStream

settings.register_profile("lpbounds", max_examples=60, deadline=None)
settings.load_profile("lpbounds")

H2 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def basis_pvm(u):
    """Rank-one projectors onto the columns of ``u``."""
    u = np.asarray(u, dtype=complex)
    return Povm(np.einsum("ik,jk->kij", u, np.conj(u)))


@pytest.fixture
def computational2():
    return basis_pvm(np.eye(2))


@pytest.fixture
def hadamard2():
    return basis_pvm(H2)


@pytest.fixture
def rng():
    return RngStream(12345, 0)


def random_hermitian(rng, n, scale=1.0):
    g = rng.complex_normal((n, n))
    return scale * 0.5 * (g + g.conj().T)


def random_psd(rng, n, rank=None):
    g = rng.complex_normal((n, rank or n))
    return g @ g.conj().T
