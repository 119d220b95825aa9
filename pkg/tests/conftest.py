import numpy as np
import pytest

from pairthermo import dynamics
from pairthermo.qstate import system_hamiltonian


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def h_default():
    return system_hamiltonian(dynamics.OMEGA_A_DEFAULT, dynamics.OMEGA_B_DEFAULT)


@pytest.fixture
def triple_default():
    return dynamics.setup_triple()
