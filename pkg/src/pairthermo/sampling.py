"""Random states, operators and parameter draws for property checks."""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from . import dynamics
from .dynamics import BathSpec
from .qstate import DensityMatrix, HamiltonianOperator


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng)


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> DensityMatrix:
    """Ginibre-ensemble density matrix (full rank unless ``rank`` is given)."""
    k = dim if rank is None else rank
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    return DensityMatrix(0.5 * (m + m.conj().T))


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (g + g.conj().T)


def random_hamiltonian(rng: np.random.Generator, dim: int, scale: float = 1e12) -> HamiltonianOperator:
    return HamiltonianOperator.from_matrix(random_hermitian(rng, dim, scale))


def random_x_state(rng: np.random.Generator) -> DensityMatrix:
    """X state with random populations and an admissible real coherence."""
    p = rng.dirichlet(np.ones(4))
    c = rng.uniform(-1, 1) * np.sqrt(p[1] * p[2])
    m = np.diag(p).astype(complex)
    m[1, 2] = m[2, 1] = c
    return DensityMatrix(m)


def random_triple(rng: np.random.Generator):
    """Setups (a, b, c) with random frequencies, temperatures and couplings.

    Temperatures span 50-600 K and couplings stay within a factor 2 of the
    calibrated value, so the two baths' relaxation rates differ by at most
    a factor of about 50 and the fixed-step integrator stays cheap.
    """
    omega_a = rng.uniform(1e12, 3e12)
    omega_b = omega_a * rng.uniform(0.3, 0.9)
    dip = dynamics.calibrated_dipole_sq()
    bath_a = BathSpec(rng.uniform(50, 600), dipole_sq=dip * rng.uniform(0.5, 2))
    bath_b = BathSpec(rng.uniform(50, 600), dipole_sq=dip * rng.uniform(0.5, 2))
    return dynamics.setup_triple(omega_a, omega_b, bath_a, bath_b)


def rotate(rng: np.random.Generator, rho: DensityMatrix) -> DensityMatrix:
    """Conjugate ``rho`` by a Haar-random unitary of matching dimension."""
    u = random_unitary(rng, rho.dim)
    return DensityMatrix(u @ rho.matrix @ u.conj().T)
