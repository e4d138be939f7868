import numpy as np
import pytest

from chancert.channels import KrausChannel

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0 + 0j, -1.0])


def ket(*amps):
    v = np.asarray(amps, dtype=complex)
    return np.outer(v, v.conj())


def rand_herm(d, rng):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return A + A.conj().T


@pytest.fixture
def identity_channel():
    return KrausChannel((I2,))


@pytest.fixture
def x_channel():
    return KrausChannel((X,))


@pytest.fixture
def depolarizing():
    return KrausChannel((I2 / 2, X / 2, Y / 2, Z / 2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
