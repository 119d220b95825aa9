"""Passive states, ergotropy and the operational first law.

For a state ``rho`` with populations ``r_1 >= r_2 >= ...`` and a Hamiltonian
with levels ``e_1 <= e_2 <= ...`` the passive state puts ``r_n`` on level
``e_n``. Ergotropy is the energy difference between ``rho`` and its passive
state; the operational first law splits an energy change into an ergotropy
change, an adiabatic-work term and a heat-like term built from passive
states.

The locality-gap helpers compare the ergotropy of the two-bath setup with the
sum of the single-bath setups at the same time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import dynamics
from .dynamics import RateSet, Setup, SetupParams
from .errors import DomainError, ValidationError
from .qstate import (
    DensityMatrix,
    HamiltonianOperator,
    concurrence,
    is_x_state,
    partial_trace_operator,
    singlet_state,
    system_hamiltonian,
)

LEDGER_TOL = 1e-9


def _check_dims(rho: DensityMatrix, h: HamiltonianOperator):
    if rho.dim != h.dim:
        raise DomainError(f"state dimension {rho.dim} does not match Hamiltonian dimension {h.dim}")


@dataclass(frozen=True)
class PassiveState:
    """Passive counterpart of a state: populations on the ascending energy basis."""

    matrix: DensityMatrix
    populations: np.ndarray
    energies: np.ndarray

    @property
    def energy(self) -> float:
        return float(np.dot(self.populations, self.energies))


def _passive_from_populations(pops: np.ndarray, h: HamiltonianOperator) -> PassiveState:
    v = h.vectors
    m = (v * pops) @ v.conj().T
    pops = np.array(pops, dtype=float)
    pops.setflags(write=False)
    return PassiveState(DensityMatrix(m, validate=False), pops, h.energies)


def passive_state(rho: DensityMatrix, h: HamiltonianOperator) -> PassiveState:
    """Largest population on the lowest level, and so on.

    Ties are broken stably; ``tr[pi H]`` does not depend on the choice.
    """
    _check_dims(rho, h)
    return _passive_from_populations(rho.spectrum().values, h)


def internal_energy(rho: DensityMatrix, h: HamiltonianOperator) -> float:
    _check_dims(rho, h)
    return float(np.real(np.trace(rho.matrix @ h.matrix)))


def ergotropy(rho: DensityMatrix, h: HamiltonianOperator) -> float:
    """``tr[rho H] - tr[pi H]``."""
    return internal_energy(rho, h) - passive_state(rho, h).energy


def ergotropy_overlap_sum(rho: DensityMatrix, h: HamiltonianOperator) -> float:
    """Ergotropy as ``sum_{m,n} r_m e_n (|<e_n|r_m>|^2 - delta_mn)``.

    Independent of :func:`ergotropy`: it never forms ``tr[rho H]``.
    """
    _check_dims(rho, h)
    spec = rho.spectrum()
    overlap = np.abs(h.vectors.conj().T @ spec.vectors) ** 2  # [n, m]
    weights = overlap - np.eye(rho.dim)
    return float(np.einsum("m,n,nm->", spec.values, h.energies, weights))


def _check_passive(pi: PassiveState, h: HamiltonianOperator, tol: float = 1e-12):
    m = pi.matrix.matrix
    if m.shape[0] != h.dim:
        raise DomainError("passive state and Hamiltonian dimensions differ")
    d = h.vectors.conj().T @ m @ h.vectors
    off = d - np.diag(np.diag(d))
    if np.max(np.abs(off)) > 1e-10:
        raise ValidationError("state is not diagonal in the Hamiltonian eigenbasis")
    pops = np.real(np.diag(d))
    # degenerate levels may hold populations in any order
    for i in range(len(pops) - 1):
        if pops[i + 1] > pops[i] + tol and not math.isclose(h.energies[i], h.energies[i + 1]):
            raise ValidationError("populations increase with energy; state is not passive")


def adiabatic_work(pi_m: PassiveState, h: HamiltonianOperator, h_new: HamiltonianOperator) -> float:
    """Energy change when ``pi_m`` follows an adiabatic change ``H -> H'``.

    The populations stay attached to the ordered levels, so the result is
    ``sum_n p_n (e'_n - e_n)``. Exactly zero when ``H' == H``.
    """
    _check_passive(pi_m, h)
    if h_new.dim != h.dim:
        raise DomainError("Hamiltonians must have the same dimension")
    if h_new == h:
        return 0.0
    d = h.vectors.conj().T @ pi_m.matrix.matrix @ h.vectors
    pops = np.real(np.diag(d))
    return float(np.dot(pops, h_new.energies) - np.dot(pops, h.energies))


def operational_heat(rho: DensityMatrix, rho_new: DensityMatrix, h: HamiltonianOperator) -> float:
    """``tr[pi_m H] - tr[pi H]`` for a fixed Hamiltonian."""
    _check_dims(rho, h)
    _check_dims(rho_new, h)
    return passive_state(rho_new, h).energy - passive_state(rho, h).energy


@dataclass(frozen=True)
class ThermoLedger:
    delta_energy: float
    delta_ergotropy: float
    adiabatic_work: float
    operational_heat: float

    @property
    def closure_residual(self) -> float:
        """Relative mismatch of ``dE = dW + W_ad + Q_op``."""
        rhs = self.delta_ergotropy + self.adiabatic_work + self.operational_heat
        scale = max(abs(self.delta_energy), abs(self.delta_ergotropy), abs(self.operational_heat), 1e-300)
        return abs(self.delta_energy - rhs) / scale


def first_law_ledger(rho0: DensityMatrix, rho_t: DensityMatrix, h: HamiltonianOperator) -> ThermoLedger:
    """Operational first-law decomposition of ``rho0 -> rho_t`` under fixed ``H``.

    Raises ``ValidationError`` if the decomposition does not close.
    """
    e0, et = internal_energy(rho0, h), internal_energy(rho_t, h)
    pi0, pit = passive_state(rho0, h), passive_state(rho_t, h)
    ledger = ThermoLedger(
        delta_energy=et - e0,
        delta_ergotropy=(et - pit.energy) - (e0 - pi0.energy),
        adiabatic_work=adiabatic_work(pit, h, h),
        operational_heat=pit.energy - pi0.energy,
    )
    # all three terms share the same energy scale; compare against it
    scale = max(abs(e0), abs(et), abs(pi0.energy), abs(pit.energy), 1e-300)
    resid = abs(ledger.delta_energy - ledger.delta_ergotropy - ledger.adiabatic_work - ledger.operational_heat)
    if resid > LEDGER_TOL * scale:
        raise ValidationError(f"first-law ledger does not close (residual {resid:.3e})")
    return ledger


def delta_e_analytic(setup, r: RateSet, omega_a: float, omega_b: float, t: float) -> float:
    """Closed-form internal-energy change from the singlet.

    Each coupled qubit contributes ``w_i (eta_i - 1) / (2 (2 nbar_i + 1))``;
    setup a is the sum of setups b and c.
    """
    setup = Setup.parse(setup)
    f = dynamics.eta_factors(r, t)
    part_a = omega_a * (f.eta_a - 1) / (2 * (2 * r.nbar_a + 1))
    part_b = omega_b * (f.eta_b - 1) / (2 * (2 * r.nbar_b + 1))
    if setup is Setup.A_AND_B:
        return part_a + part_b
    if setup is Setup.A_ONLY:
        return part_a
    return part_b


def gibbs_state(h: HamiltonianOperator, temperature: float) -> DensityMatrix:
    """``exp(-H / (k_B T / hbar)) / Z`` with ``H`` in s^-1."""
    if not temperature > 0:
        raise DomainError(f"Gibbs state needs a positive temperature, got {temperature}")
    return DensityMatrix((h.vectors * gibbs_populations(h.energies, temperature)) @ h.vectors.conj().T)


def gibbs_populations(energies, temperature: float) -> np.ndarray:
    beta = dynamics.HBAR_OVER_KB / temperature
    e = np.asarray(energies, dtype=float)
    w = np.exp(-beta * (e - e.min()))
    return w / w.sum()


# --- locality gap ---------------------------------------------------------

@dataclass(frozen=True)
class GapReport:
    t: float
    W: float
    W_alice: float
    W_bob: float
    dW: float
    dW_alice: float
    dW_bob: float
    concurrence_a: float

    @property
    def gap_W(self) -> float:
        return self.W - self.W_alice - self.W_bob

    @property
    def gap_dW(self) -> float:
        return self.dW - self.dW_alice - self.dW_bob


def gap_report(triple: Sequence[SetupParams], t: float) -> GapReport:
    """Ergotropies of the three setups at ``t`` and their changes from ``t = 0``."""
    omega_a, omega_b, _, _ = dynamics.shared_parameters(triple)
    h = system_hamiltonian(omega_a, omega_b)
    states = [dynamics.analytic_state(p, t) for p in triple]
    w = [ergotropy(s, h) for s in states]
    w0 = ergotropy(singlet_state(), h)
    return GapReport(
        t=t,
        W=w[0],
        W_alice=w[1],
        W_bob=w[2],
        dW=w[0] - w0,
        dW_alice=w[1] - w0,
        dW_bob=w[2] - w0,
        concurrence_a=concurrence(states[0]),
    )


@dataclass(frozen=True)
class LocalitySides:
    """Both sides of the rearranged locality hypothesis, two ways.

    ``lhs``/``rhs`` come from the states; ``lhs_closed``/``rhs_closed`` are the
    reference closed forms, kept as diagnostics only.
    """

    t: float
    lhs: float
    rhs: float
    lhs_closed: float
    rhs_closed: float

    @property
    def violation(self) -> float:
        """``lhs - rhs``; equals ``dW - dW_alice - dW_bob``."""
        return self.lhs - self.rhs

    @property
    def lhs_deviation(self) -> float:
        return _rel_dev(self.lhs_closed, self.lhs)

    @property
    def rhs_deviation(self) -> float:
        return _rel_dev(self.rhs_closed, self.rhs)


def _rel_dev(x: float, ref: float) -> float:
    if not math.isfinite(x):
        return math.inf
    return abs(x - ref) / max(abs(ref), 1e-300)


def _diag_energy(m: np.ndarray, h: HamiltonianOperator) -> float:
    """``sum_n e_n <e_n|m|e_n>``."""
    d = np.real(np.einsum("in,ij,jn->n", h.vectors.conj(), m, h.vectors))
    return float(np.dot(h.energies, d))


def locality_sides(triple: Sequence[SetupParams], t: float) -> LocalitySides:
    """Evaluate ``W_alice(0) + W_bob(0) - W(0) + sum e_n <e_n|rho - rho_a - rho_b|e_n>``
    against ``sum e_n <e_n|pi - pi_a - pi_b|e_n>``.
    """
    omega_a, omega_b, _, _ = dynamics.shared_parameters(triple)
    h = system_hamiltonian(omega_a, omega_b)
    w0 = [ergotropy(dynamics.analytic_state(p, 0.0), h) for p in triple]
    states = [dynamics.analytic_state(p, t) for p in triple]
    passives = [passive_state(s, h).matrix.matrix for s in states]
    rho_mix = states[0].matrix - states[1].matrix - states[2].matrix
    pi_mix = passives[0] - passives[1] - passives[2]
    lhs = w0[1] + w0[2] - w0[0] + _diag_energy(rho_mix, h)
    rhs = _diag_energy(pi_mix, h)
    lhs_c, rhs_c = locality_closed_forms(triple[0], t)
    return LocalitySides(t, lhs, rhs, lhs_c, rhs_c)


def locality_closed_forms(params_a: SetupParams, t: float) -> tuple[float, float]:
    """Reference closed forms for the two sides near the decoherence time.

    Returns ``inf``/``nan`` where the expressions are singular (e.g. ``t = 0``).
    """
    r = dynamics.rates(params_a)
    f = dynamics.eta_factors(r, t)
    na, nb = r.nbar_a, r.nbar_b
    ea, eb, e = f.eta_a, f.eta_b, f.eta
    half = 0.5 * (params_a.omega_a - params_a.omega_b)
    with np.errstate(divide="ignore", invalid="ignore"):
        ea_, eb_, e_ = np.float64(ea), np.float64(eb), np.float64(e)
        lhs = half * ((eb_ - 1) / (2 * nb + 1) - 1)
        rhs = half * (
            (eb_ - 1) / (2 * nb + 1)
            + (2 * nb + 1) * 2 * eb_ / (eb_ - 1)
            + (2 * na + 1) * 2 * ea_ / (ea_ - 1)
            + (2 * na + 1) * (2 * nb + 1) * 2 * e_
            / (2 * (nb - na) + (eb_ - ea_) + 2 * (eb_ * na - ea_ * nb))
        )
    return float(lhs), float(rhs)


@dataclass(frozen=True)
class ClosedFormReport:
    closed_form: float
    generic: float

    @property
    def discrepancy(self) -> float:
        return abs(self.closed_form - self.generic) if math.isfinite(self.closed_form) else math.inf


def ergotropy_closed_form(setup, rho: DensityMatrix, omega_a: float, omega_b: float) -> ClosedFormReport:
    """Closed-form alpha/beta/Delta expression for X-state ergotropy.

    The same expression is used for all three setups. It is a diagnostic:
    the eigendecomposition route (``generic``) is authoritative.
    """
    Setup.parse(setup)
    m = rho.matrix
    if rho.dim != 4 or not is_x_state(m):
        raise DomainError("closed-form ergotropy needs a two-qubit X state")
    l22, l33 = m[1, 1].real, m[2, 2].real
    l23, l32 = m[1, 2].real, m[2, 1].real
    half = 0.5 * (omega_a - omega_b)
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.sqrt(np.float64((l33**2 - l22**2) ** 2 + 4 * l23 * l32))
        alpha = (l22 - l33 - delta) / (2 * np.float64(l32))
        beta = (l22 - l33 + delta) / (2 * np.float64(l32))
        w = (l22 + l33 + delta) * half * (-1 / (1 + beta**2)) + (l22 + l33 - delta) * half * (
            alpha**2 / (1 + alpha**2)
        )
    return ClosedFormReport(float(w), ergotropy(rho, system_hamiltonian(omega_a, omega_b)))


@dataclass(frozen=True)
class FactorizationResult:
    W: float
    W_sum: float

    @property
    def difference(self) -> float:
        return self.W - self.W_sum


def split_additive(h: HamiltonianOperator, tol: float = 1e-10):
    """Write ``H = H_A x I + I x H_B``; raise ``DomainError`` if impossible."""
    if h.dim != 4:
        raise DomainError("additive split needs a two-qubit Hamiltonian")
    m = h.matrix
    shift = np.trace(m).real / 8
    h_a = 0.5 * partial_trace_operator(m, "A") - shift * np.eye(2)
    h_b = 0.5 * partial_trace_operator(m, "B") - shift * np.eye(2)
    rebuilt = np.kron(h_a, np.eye(2)) + np.kron(np.eye(2), h_b)
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(rebuilt - m)) > tol * scale:
        raise DomainError("Hamiltonian has an interaction term; it is not additive")
    return HamiltonianOperator.from_matrix(h_a), HamiltonianOperator.from_matrix(h_b)


def factorization_check(rho_a: DensityMatrix, rho_b: DensityMatrix, h: HamiltonianOperator) -> FactorizationResult:
    """Ergotropy of ``rho_a x rho_b`` against the sum of local ergotropies."""
    if rho_a.dim != 2 or rho_b.dim != 2:
        raise DomainError("factorization_check expects single-qubit states")
    h_a, h_b = split_additive(h)
    joint = DensityMatrix(np.kron(rho_a.matrix, rho_b.matrix))
    return FactorizationResult(ergotropy(joint, h), ergotropy(rho_a, h_a) + ergotropy(rho_b, h_b))
