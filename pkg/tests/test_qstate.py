import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairthermo import sampling
from pairthermo.errors import DomainError, ValidationError
from pairthermo.qstate import (
    SIGMA_Z,
    DensityMatrix,
    basis_state,
    concurrence,
    eigen_hermitian,
    is_x_state,
    maximally_mixed,
    partial_trace,
    product_state,
    singlet_state,
    swap_qubits,
    system_hamiltonian,
)


def test_identity_spectrum():
    np.testing.assert_allclose(eigen_hermitian(np.eye(4)).values, [1, 1, 1, 1])


def test_pauli_z_spectrum():
    np.testing.assert_allclose(eigen_hermitian(SIGMA_Z).values, [-1, 1])


def test_eigen_descending_option():
    vals = eigen_hermitian(np.diag([3.0, -1.0, 2.0, 0.0]), descending=True).values
    np.testing.assert_allclose(vals, [3, 2, 0, -1])


def test_eigen_rejects_non_hermitian():
    with pytest.raises(ValidationError, match="Hermitian"):
        eigen_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


def test_eigen_roundtrip_random(rng):
    for _ in range(1000):
        m = sampling.random_hermitian(rng, int(rng.choice([2, 4])))
        assert np.max(np.abs(eigen_hermitian(m).reconstruct() - m)) < 1e-10


def test_system_hamiltonian_unit_spectrum():
    h = system_hamiltonian(2.0, 1.0)
    np.testing.assert_allclose(h.energies, [-1.5, -0.5, 0.5, 1.5])


def test_system_hamiltonian_default_diagonal():
    h = system_hamiltonian(2e12, 1e12)
    np.testing.assert_array_equal(np.diag(h.matrix).real, [1.5e12, 0.5e12, -0.5e12, -1.5e12])
    assert np.count_nonzero(h.matrix - np.diag(np.diag(h.matrix))) == 0


def test_system_hamiltonian_degenerate_case_warns():
    with pytest.warns(UserWarning):
        h = system_hamiltonian(3.0, 3.0)
    np.testing.assert_allclose(h.energies, [-3, 0, 0, 3])


@pytest.mark.parametrize("wa,wb", [(2.0, 1.0), (5.0, 0.1), (1e12, 0.3e12)])
def test_ground_state_is_minus_minus(wa, wb):
    h = system_hamiltonian(wa, wb)
    assert h.energies[0] == pytest.approx(-(wa + wb) / 2)
    np.testing.assert_allclose(np.abs(h.vectors[:, 0]), [0, 0, 0, 1])


@pytest.mark.parametrize("wa,wb", [(0.0, 1.0), (1.0, -1.0)])
def test_system_hamiltonian_domain(wa, wb):
    with pytest.raises(DomainError):
        system_hamiltonian(wa, wb)


def test_singlet_entries():
    s = singlet_state()
    assert np.trace(s.matrix).real == 1.0
    assert s.purity() == pytest.approx(1.0, abs=1e-15)
    assert s.matrix[1, 2] == -0.5
    assert s.matrix[0, 0] == 0 and s.matrix[3, 3] == 0


def test_density_matrix_is_immutable():
    s = singlet_state()
    with pytest.raises(ValueError):
        s.matrix[0, 0] = 1.0


def test_density_validation_names_problem():
    with pytest.raises(ValidationError, match="trace"):
        DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(ValidationError):
        DensityMatrix(np.diag([1.5, -0.5]))


def test_partial_trace_singlet():
    for keep in ("A", "B"):
        np.testing.assert_allclose(partial_trace(singlet_state(), keep).matrix, np.eye(2) / 2, atol=1e-15)


def test_partial_trace_product_keep_b():
    np.testing.assert_allclose(partial_trace(basis_state("+-"), "B").matrix, basis_state("-").matrix)


def test_partial_trace_rejects_qubit():
    with pytest.raises(DomainError):
        partial_trace(maximally_mixed(2), "A")


def test_dimension_outside_two_qubits_rejected():
    with pytest.raises(DomainError):
        eigen_hermitian(np.eye(3))


def test_partial_trace_of_random_products(rng):
    for _ in range(200):
        a, b = sampling.random_density(rng, 2), sampling.random_density(rng, 2)
        joint = product_state(a, b)
        assert np.max(np.abs(partial_trace(joint, "A").matrix - a.matrix)) < 1e-12
        assert np.max(np.abs(partial_trace(joint, "B").matrix - b.matrix)) < 1e-12
        assert np.trace(partial_trace(sampling.random_density(rng, 4), "A").matrix).real == pytest.approx(1, abs=1e-12)


def test_concurrence_singlet_and_products(rng):
    assert concurrence(singlet_state()) == pytest.approx(1.0, abs=1e-12)
    for _ in range(50):
        joint = product_state(sampling.random_density(rng, 2), sampling.random_density(rng, 2))
        assert concurrence(joint) < 1e-8


def test_concurrence_local_unitary_invariance(rng):
    for _ in range(200):
        rho = sampling.random_density(rng, 4)
        u = np.kron(sampling.random_unitary(rng, 2), sampling.random_unitary(rng, 2))
        moved = DensityMatrix(u @ rho.matrix @ u.conj().T)
        assert abs(concurrence(moved) - concurrence(rho)) < 1e-8


def test_concurrence_pure_state_oracle(rng):
    for _ in range(200):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        exact = 2 * abs(psi[0] * psi[3] - psi[1] * psi[2])
        assert concurrence(DensityMatrix(np.outer(psi, psi.conj()))) == pytest.approx(exact, abs=1e-7)


def test_concurrence_x_state_oracle(rng):
    # X states: C = 2 max(0, |r23| - sqrt(r11 r44), |r14| - sqrt(r22 r33))
    for _ in range(200):
        rho = sampling.random_x_state(rng)
        m = rho.matrix.real
        exact = 2 * max(0.0, abs(m[1, 2]) - np.sqrt(m[0, 0] * m[3, 3]))
        assert concurrence(rho) == pytest.approx(exact, abs=1e-7)


def test_swap_and_x_state_helpers():
    np.testing.assert_allclose(swap_qubits(basis_state("+-")), basis_state("-+").matrix)
    assert is_x_state(singlet_state().matrix)
    assert not is_x_state(np.ones((4, 4)) / 4)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_random_density_is_valid(seed, rank):
    rho = sampling.random_density(np.random.default_rng(seed), 4, rank=rank)
    assert rho.eigenvalues().min() > -1e-12
    assert abs(np.trace(rho.matrix) - 1) < 1e-12
    assert 0.0 <= concurrence(rho) <= 1.0 + 1e-12
