import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from pairthermo import dynamics, sampling
from pairthermo.dynamics import BathSpec, Setup
from pairthermo.errors import ConfigError, DomainError, UsageError
from pairthermo.qstate import DensityMatrix, density_diagnostics, singlet_state, swap_qubits


def _qubit_rate_matrix(gamma, nbar):
    # populations ordered (excited, ground)
    return np.array([[-gamma * (nbar + 1), gamma * nbar], [gamma * (nbar + 1), -gamma * nbar]])


def markov_populations(params, t):
    """Diagonal of the state from a classical two-qubit rate equation."""
    r = dynamics.rates(params)
    gen = np.kron(_qubit_rate_matrix(r.gamma_a, r.nbar_a), np.eye(2)) + np.kron(
        np.eye(2), _qubit_rate_matrix(r.gamma_b, r.nbar_b)
    )
    return expm(gen * t) @ np.array([0.0, 0.5, 0.5, 0.0])


# --- bath functions ----------------------------------------------------------

def test_spectral_density_values():
    assert dynamics.spectral_density(0.0, 0.3, 5.0) == 0.0
    assert dynamics.spectral_density(5.0, 0.3, 5.0) == pytest.approx(0.3 * 5.0 / math.pi)
    grid = np.linspace(0, 20, 20001)
    vals = [dynamics.spectral_density(w, 0.3, 5.0) for w in grid]
    assert grid[int(np.argmax(vals))] == pytest.approx(5.0, abs=1e-3)


def test_mean_occupation_values():
    assert dynamics.mean_occupation(2e12, 0.0) == 0.0
    assert dynamics.mean_occupation(2e12, 100.0) == pytest.approx(6.059, abs=0.01)
    assert dynamics.mean_occupation(1e12, 300.0) == pytest.approx(38.78, abs=0.05)
    x = 2e12 * 7.6382e-12 / 100
    assert dynamics.mean_occupation(2e12, 100.0) == pytest.approx(1 / math.expm1(x), rel=1e-4)


def test_mean_occupation_huge_exponent_is_zero():
    assert dynamics.mean_occupation(1e16, 1e-3) == 0.0


def test_decoherence_rate_properties():
    assert dynamics.decoherence_rate(BathSpec(100, coupling=0.0, dipole_sq=1e-6), 2e12) == 0.0
    big_r = dynamics.decoherence_rate(BathSpec(100, cutoff_ratio=1e8, coupling=0.5, dipole_sq=2e-6), 2e12)
    assert big_r == pytest.approx(0.25 * 2e12 * 2e-6, rel=1e-12)
    one = dynamics.decoherence_rate(BathSpec(100, dipole_sq=1e-6), 2e12)
    two = dynamics.decoherence_rate(BathSpec(100, dipole_sq=2e-6), 2e12)
    assert two == pytest.approx(2 * one, rel=1e-15)


def test_calibration_hits_target_rate():
    r = dynamics.rates(dynamics.setup_params("b"))
    assert r.decay_a == pytest.approx(dynamics.CALIBRATION_DECAY_RATE, rel=1e-12)


def test_bath_validation():
    with pytest.raises(DomainError):
        BathSpec(-1.0)
    with pytest.raises(DomainError):
        BathSpec(100, cutoff_ratio=0.0)


def test_eta_factors():
    r = dynamics.rates(dynamics.setup_params("a"))
    f = dynamics.eta_factors(r, 0.0)
    assert (f.eta_a, f.eta_b, f.eta) == (1.0, 1.0, 1.0)
    f = dynamics.eta_factors(r, math.log(2) / r.decay_a)
    assert f.eta_a == pytest.approx(0.5, rel=1e-14)
    assert f.eta == f.eta_a * f.eta_b
    with pytest.raises(DomainError):
        dynamics.eta_factors(r, -1.0)


def test_setup_parsing_and_pairing():
    assert Setup.parse("B") is Setup.A_ONLY
    with pytest.raises(UsageError):
        Setup.parse("d")
    with pytest.raises(ConfigError):
        dynamics.SetupParams(Setup.A_ONLY, 2e12, 1e12, BathSpec(100), BathSpec(300))
    with pytest.raises(UsageError):
        dynamics.analytic_state_setup_b(dynamics.setup_params("a"), 0.0)


def test_shared_parameters_requires_order():
    a, b, c = dynamics.setup_triple()
    with pytest.raises(ConfigError):
        dynamics.shared_parameters((b, a, c))


# --- analytic states ---------------------------------------------------------

@pytest.mark.parametrize("setup", ["a", "b", "c"])
def test_t0_is_singlet(setup):
    rho = dynamics.analytic_state(dynamics.setup_params(setup), 0.0)
    np.testing.assert_array_equal(rho.matrix, singlet_state().matrix)


def test_setup_a_stationary_is_local_gibbs_product():
    params = dynamics.setup_params("a")
    r = dynamics.rates(params)
    m = dynamics.stationary_state(params).matrix
    pa, pb = r.nbar_a / (2 * r.nbar_a + 1), r.nbar_b / (2 * r.nbar_b + 1)
    np.testing.assert_allclose(np.diag(m).real, np.kron([pa, 1 - pa], [pb, 1 - pb]), rtol=1e-13)
    assert m[0, 0].real == pytest.approx(r.nbar_a * r.nbar_b / ((2 * r.nbar_a + 1) * (2 * r.nbar_b + 1)))
    assert m[1, 2] == 0


def test_setup_b_stationary():
    params = dynamics.setup_params("b")
    n = dynamics.rates(params).nbar_a
    d = 2 * (2 * n + 1)
    expected = [n / d, n / d, (n + 1) / d, (n + 1) / d]
    np.testing.assert_allclose(np.diag(dynamics.stationary_state(params).matrix).real, expected, rtol=1e-13)


def test_setup_c_is_relabeled_setup_b(rng):
    for _ in range(20):
        wa = rng.uniform(1e12, 3e12)
        wb = wa * rng.uniform(0.3, 0.9)
        bath = BathSpec(rng.uniform(50, 600), dipole_sq=dynamics.calibrated_dipole_sq() * rng.uniform(0.5, 2))
        c = dynamics.setup_params("c", wa, wb, bath_b=bath)
        b = dynamics.setup_params("b", wb, wa, bath_a=bath)
        t = rng.uniform(0, 3) * dynamics.decoherence_time(c)
        expected = swap_qubits(dynamics.analytic_state(b, t).matrix)
        np.testing.assert_allclose(dynamics.analytic_state(c, t).matrix, expected, atol=1e-15)


def test_populations_match_markov_chain(rng):
    for _ in range(30):
        for params in sampling.random_triple(rng):
            t = rng.uniform(0, 5) * dynamics.decoherence_time(params)
            pops = np.diag(dynamics.analytic_state(params, t).matrix).real
            np.testing.assert_allclose(pops, markov_populations(params, t), atol=1e-13)


def test_coherence_decays_at_half_the_population_rate(rng):
    for _ in range(30):
        for params in sampling.random_triple(rng):
            r = dynamics.rates(params)
            t = rng.uniform(0, 5) * dynamics.decoherence_time(params)
            expected = -0.5 * math.exp(-0.5 * (r.decay_a + r.decay_b) * t)
            assert dynamics.analytic_state(params, t).matrix[1, 2].real == pytest.approx(expected, rel=1e-12, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 20), st.sampled_from(["a", "b", "c"]))
def test_analytic_states_are_valid_densities(seed, scaled_t, setup):
    params = sampling.random_triple(np.random.default_rng(seed))["abc".index(setup)]
    rho = dynamics.analytic_state(params, scaled_t * dynamics.decoherence_time(params))
    d = density_diagnostics(rho)
    assert d["trace_error"] < 1e-12
    assert d["min_eigenvalue"] > -1e-12


# --- numerical integrator ------------------------------------------------------

def test_zero_rates_leave_state_unchanged(rng):
    frozen = BathSpec(100, rate_override=0.0)
    params = dynamics.setup_params("a", bath_a=frozen, bath_b=BathSpec(300, rate_override=0.0))
    rho0 = sampling.random_density(rng, 4)
    np.testing.assert_allclose(dynamics.numerical_lindblad(params, rho0, 1e-3, 1e-6).matrix, rho0.matrix, atol=1e-15)


def test_numerical_setup_a_at_1e7():
    params = dynamics.setup_params("a")
    num = dynamics.numerical_lindblad(params, singlet_state(), 1e-7, dynamics.default_step(params))
    assert np.max(np.abs(num.matrix - dynamics.analytic_state(params, 1e-7).matrix)) < 1e-8


def test_numerical_setup_b_grid():
    params = dynamics.setup_params("b")
    times = list(np.linspace(0, 5, 11) * dynamics.decoherence_time(params))
    traj = dynamics.numerical_trajectory(params, singlet_state(), times, dynamics.default_step(params))
    for t, rho in zip(times, traj):
        assert np.max(np.abs(rho.matrix - dynamics.analytic_state(params, t).matrix)) < 1e-8


def test_step_too_large_is_config_error():
    params = dynamics.setup_params("a")
    with pytest.raises(ConfigError):
        dynamics.numerical_lindblad(params, singlet_state(), 1e-6, 1.0 / dynamics.rates(params).decay_a)


def test_liouvillian_is_trace_preserving():
    gen = dynamics.liouvillian(dynamics.setup_params("a"))
    trace_row = np.eye(4).reshape(16)
    assert np.max(np.abs(trace_row @ gen)) < 1e-6 * np.max(np.abs(gen))


def test_random_initial_state_matches_exact_propagator(rng):
    params = dynamics.setup_params("a")
    rho0 = sampling.random_density(rng, 4)
    t = 2 * dynamics.decoherence_time(params)
    exact = (expm(dynamics.liouvillian(params) * t) @ rho0.matrix.reshape(16)).reshape(4, 4)
    num = dynamics.numerical_lindblad(params, rho0, t, dynamics.default_step(params))
    assert np.max(np.abs(num.matrix - exact)) < 1e-10
