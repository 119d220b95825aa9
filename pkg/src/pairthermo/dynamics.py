"""Bath parameterization and open-system evolution of the qubit pair.

Three experimental setups share the same singlet preparation and system
Hamiltonian and differ only in which qubit is coupled to a thermal bath:

* ``Setup.A_AND_B`` (``"a"``): both qubits, each to its own bath;
* ``Setup.A_ONLY``  (``"b"``): only Alice's qubit;
* ``Setup.B_ONLY``  (``"c"``): only Bob's qubit.

Everything here is written in the interaction picture with respect to the
(diagonal) system Hamiltonian. The closed-form states carry no unitary phase,
and the numerical integrator only propagates the dissipator, so the two
routes are directly comparable. The rotation ``exp(-i H t)`` would only
dephase the ``|+-> <-> |-+>`` coherence and leaves every spectral quantity
(ergotropy, passive states, energies) unchanged.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import constants

from .errors import ConfigError, DomainError, UsageError
from .qstate import (
    IDENTITY_2,
    SIGMA_MINUS,
    SIGMA_PLUS,
    DensityMatrix,
    singlet_state,
)

#: hbar / k_B in s*K; converts an angular frequency and a temperature into
#: the Boltzmann exponent ``hbar*w / (k_B*T)``.
HBAR_OVER_KB = constants.hbar / constants.k

# Default experiment parameters.
OMEGA_A_DEFAULT = 2e12
OMEGA_B_DEFAULT = 1e12
T_A_DEFAULT = 100.0
T_B_DEFAULT = 300.0

DEFAULT_CUTOFF_RATIO = 1.0
DEFAULT_COUPLING = 1.0
#: Coherence-decay target used to calibrate the otherwise unknown coupling:
#: Gamma_A (2 nbar_A + 1) = 1e7 s^-1 at the default parameters, i.e. a
#: decoherence time of about 1e-7 s.
CALIBRATION_DECAY_RATE = 1e7


class Setup(str, enum.Enum):
    A_AND_B = "a"
    A_ONLY = "b"
    B_ONLY = "c"

    @classmethod
    def parse(cls, value) -> "Setup":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise UsageError(f"unknown setup {value!r}; expected one of a, b, c") from None


def spectral_density(omega: float, gamma0: float, cutoff: float) -> float:
    """Ohmic spectral density with Lorentz-Drude cutoff.

    ``J(W) = (2 g0 W / pi) * L^2 / (L^2 + W^2)``; peaks at ``W = L`` with
    value ``g0 L / pi``. Kept as provenance for the decay rates; nothing
    integrates over it.
    """
    if omega < 0:
        raise DomainError(f"spectral density needs a non-negative frequency, got {omega}")
    if cutoff <= 0:
        raise DomainError(f"cutoff frequency must be positive, got {cutoff}")
    return 2.0 * gamma0 * omega / math.pi * cutoff**2 / (cutoff**2 + omega**2)


def mean_occupation(omega: float, temperature: float) -> float:
    """Bose-Einstein occupation of a bath mode at frequency ``omega`` (s^-1)."""
    if omega <= 0:
        raise DomainError(f"mode frequency must be positive, got {omega}")
    if temperature < 0:
        raise DomainError(f"temperature must be non-negative, got {temperature}")
    if temperature == 0:
        return 0.0
    x = HBAR_OVER_KB * omega / temperature
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class BathSpec:
    """Thermal bath attached to one qubit.

    ``rate_override`` replaces the decay rate computed from the coupling
    parameters (used by the ``--gamma-a/--gamma-b`` CLI flags).
    """

    temperature: float
    cutoff_ratio: float = DEFAULT_CUTOFF_RATIO
    coupling: float = DEFAULT_COUPLING
    dipole_sq: float | None = None
    rate_override: float | None = None

    def __post_init__(self):
        bad = []
        if not self.temperature >= 0:
            bad.append(f"temperature={self.temperature}")
        if not self.cutoff_ratio > 0:
            bad.append(f"cutoff_ratio={self.cutoff_ratio}")
        if not self.coupling >= 0:
            bad.append(f"coupling={self.coupling}")
        if self.dipole_sq is None and not bad:
            object.__setattr__(self, "dipole_sq", calibrated_dipole_sq(self.cutoff_ratio, self.coupling))
        if self.dipole_sq is not None and not self.dipole_sq >= 0:
            bad.append(f"dipole_sq={self.dipole_sq}")
        if self.rate_override is not None and not self.rate_override >= 0:
            bad.append(f"rate_override={self.rate_override}")
        if bad:
            raise DomainError("invalid bath: " + ", ".join(bad))

    def with_temperature(self, temperature: float) -> "BathSpec":
        return BathSpec(temperature, self.cutoff_ratio, self.coupling, self.dipole_sq, self.rate_override)


def decoherence_rate(bath: BathSpec, omega: float) -> float:
    """``Gamma = g0^2 * w * r^2 * |d|^2 / (1 + r^2)`` in s^-1."""
    if bath.rate_override is not None:
        return float(bath.rate_override)
    r2 = bath.cutoff_ratio**2
    return bath.coupling**2 * omega * r2 * bath.dipole_sq / (1.0 + r2)


def calibrated_dipole_sq(cutoff_ratio: float = DEFAULT_CUTOFF_RATIO, coupling: float = DEFAULT_COUPLING) -> float:
    """``|d|^2`` giving the calibrated coherence-decay rate at the default parameters."""
    if coupling == 0:
        return 0.0
    n = mean_occupation(OMEGA_A_DEFAULT, T_A_DEFAULT)
    r2 = cutoff_ratio**2
    gamma = CALIBRATION_DECAY_RATE / (2 * n + 1)
    return gamma * (1.0 + r2) / (coupling**2 * OMEGA_A_DEFAULT * r2)


@dataclass(frozen=True)
class SetupParams:
    setup: Setup
    omega_a: float
    omega_b: float
    bath_a: BathSpec | None = None
    bath_b: BathSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "setup", Setup.parse(self.setup))
        if self.omega_a <= 0 or self.omega_b <= 0:
            raise DomainError("qubit frequencies must be positive")
        want_a = self.setup in (Setup.A_AND_B, Setup.A_ONLY)
        want_b = self.setup in (Setup.A_AND_B, Setup.B_ONLY)
        if want_a != (self.bath_a is not None) or want_b != (self.bath_b is not None):
            raise ConfigError(
                f"setup {self.setup.value} requires bath_a={'yes' if want_a else 'no'}, "
                f"bath_b={'yes' if want_b else 'no'}"
            )


def setup_params(
    setup,
    omega_a: float = OMEGA_A_DEFAULT,
    omega_b: float = OMEGA_B_DEFAULT,
    bath_a: BathSpec | None = None,
    bath_b: BathSpec | None = None,
) -> SetupParams:
    """Build ``SetupParams`` keeping only the baths the setup uses."""
    setup = Setup.parse(setup)
    if bath_a is None:
        bath_a = BathSpec(T_A_DEFAULT)
    if bath_b is None:
        bath_b = BathSpec(T_B_DEFAULT)
    return SetupParams(
        setup,
        omega_a,
        omega_b,
        bath_a if setup is not Setup.B_ONLY else None,
        bath_b if setup is not Setup.A_ONLY else None,
    )


def setup_triple(
    omega_a: float = OMEGA_A_DEFAULT,
    omega_b: float = OMEGA_B_DEFAULT,
    bath_a: BathSpec | None = None,
    bath_b: BathSpec | None = None,
) -> tuple[SetupParams, SetupParams, SetupParams]:
    """The three setups (a, b, c) sharing frequencies and baths."""
    return tuple(setup_params(s, omega_a, omega_b, bath_a, bath_b) for s in Setup)


@dataclass(frozen=True)
class RateSet:
    gamma_a: float
    gamma_b: float
    nbar_a: float
    nbar_b: float

    @property
    def decay_a(self) -> float:
        """Population relaxation rate ``Gamma_A (2 nbar_A + 1)`` of qubit A."""
        return self.gamma_a * (2 * self.nbar_a + 1)

    @property
    def decay_b(self) -> float:
        return self.gamma_b * (2 * self.nbar_b + 1)


def rates(params: SetupParams) -> RateSet:
    ga = gb = na = nb = 0.0
    if params.bath_a is not None:
        ga = decoherence_rate(params.bath_a, params.omega_a)
        na = mean_occupation(params.omega_a, params.bath_a.temperature)
    if params.bath_b is not None:
        gb = decoherence_rate(params.bath_b, params.omega_b)
        nb = mean_occupation(params.omega_b, params.bath_b.temperature)
    return RateSet(ga, gb, na, nb)


@dataclass(frozen=True)
class EtaFactors:
    eta_a: float
    eta_b: float
    eta: float


def _decay(rate: float, t: float) -> float:
    if rate == 0.0:
        return 1.0
    return math.exp(-rate * t)


def _one_minus_decay(rate: float, t: float) -> float:
    """``1 - exp(-rate t)`` without cancellation at small ``rate t``."""
    if rate == 0.0:
        return 0.0
    return -math.expm1(-rate * t)


def eta_factors(r: RateSet, t: float) -> EtaFactors:
    """``eta_i = exp(-Gamma_i t (2 nbar_i + 1))`` and their product.

    An absent bath has zero rate and contributes ``eta = 1``. ``t = inf`` is
    accepted and gives the stationary limit.
    """
    if not t >= 0:
        raise DomainError(f"time must be non-negative, got {t}")
    ea = _decay(r.decay_a, t)
    eb = _decay(r.decay_b, t)
    return EtaFactors(ea, eb, ea * eb)


def _x_state(l11, l22, l33, l44, l23) -> DensityMatrix:
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0], m[1, 1], m[2, 2], m[3, 3] = l11, l22, l33, l44
    m[1, 2] = m[2, 1] = l23
    return DensityMatrix(m)


def _require(params: SetupParams, setup: Setup):
    if params.setup is not setup:
        raise UsageError(f"expected setup {setup.value!r}, got {params.setup.value!r}")


def analytic_state_setup_a(params: SetupParams, t: float) -> DensityMatrix:
    """Closed-form X state when both qubits are coupled to baths.

    The coherence decays as ``sqrt(eta_A eta_B)``: each qubit's transverse
    relaxation runs at half its population rate.
    """
    _require(params, Setup.A_AND_B)
    r = rates(params)
    f = eta_factors(r, t)
    na, nb = r.nbar_a, r.nbar_b
    ea, eb, e = f.eta_a, f.eta_b, f.eta
    # 1 - eta factors, so the populations that start at zero carry no cancellation
    ua, ub = _one_minus_decay(r.decay_a, t), _one_minus_decay(r.decay_b, t)
    u = _one_minus_decay(r.decay_a + r.decay_b, t)
    d = 2 * (2 * na + 1) * (2 * nb + 1)
    l11 = (na * eb * ua + nb * ea * ub + 2 * na * nb * u) / d
    l22 = (ea + na * (2 - eb * ua) + ea * nb + e * nb + 2 * e * na * nb + 2 * na * nb) / d
    l33 = (eb + nb * (2 - ea * ub) + eb * na + e * na + 2 * e * na * nb + 2 * na * nb) / d
    l44 = (ua + ub + na * (ub + u) + nb * (ua + u) + 2 * na * nb * u) / d
    return _x_state(l11, l22, l33, l44, -0.5 * math.sqrt(e))


def _single_bath_entries(n: float, eta: float, one_minus_eta: float):
    """Populations (|++>, |+->, |-+>, |-->) with the bath on qubit A."""
    d = 2 * (2 * n + 1)
    return (
        n * one_minus_eta / d,
        (eta + n + eta * n) / d,
        (n + eta * n + 1) / d,
        (n + 1) * one_minus_eta / d,
    )


def analytic_state_setup_b(params: SetupParams, t: float) -> DensityMatrix:
    """Closed-form X state when only Alice's qubit is coupled."""
    _require(params, Setup.A_ONLY)
    r = rates(params)
    ea = eta_factors(r, t).eta_a
    l11, l22, l33, l44 = _single_bath_entries(r.nbar_a, ea, _one_minus_decay(r.decay_a, t))
    return _x_state(l11, l22, l33, l44, -0.5 * math.sqrt(ea))


def analytic_state_setup_c(params: SetupParams, t: float) -> DensityMatrix:
    """Closed-form X state when only Bob's qubit is coupled.

    Mirror image of setup b: the roles of ``|+->`` and ``|-+>`` exchange.
    """
    _require(params, Setup.B_ONLY)
    r = rates(params)
    eb = eta_factors(r, t).eta_b
    l11, l22, l33, l44 = _single_bath_entries(r.nbar_b, eb, _one_minus_decay(r.decay_b, t))
    return _x_state(l11, l33, l22, l44, -0.5 * math.sqrt(eb))


_ANALYTIC = {
    Setup.A_AND_B: analytic_state_setup_a,
    Setup.A_ONLY: analytic_state_setup_b,
    Setup.B_ONLY: analytic_state_setup_c,
}


def analytic_state(params: SetupParams, t: float) -> DensityMatrix:
    """Closed-form state of whichever setup ``params`` describes."""
    return _ANALYTIC[params.setup](params, t)


def stationary_state(params: SetupParams) -> DensityMatrix:
    return analytic_state(params, math.inf)


# --- numerical route ------------------------------------------------------

def _dissipator_super(op: np.ndarray) -> np.ndarray:
    """Superoperator of ``D[L] rho`` acting on row-major ``vec(rho)``."""
    eye = np.eye(op.shape[0])
    ldl = op.conj().T @ op
    return np.kron(op, op.conj()) - 0.5 * np.kron(ldl, eye) - 0.5 * np.kron(eye, ldl.T)


_L_A_DOWN = np.kron(SIGMA_MINUS, IDENTITY_2)
_L_A_UP = np.kron(SIGMA_PLUS, IDENTITY_2)
_L_B_DOWN = np.kron(IDENTITY_2, SIGMA_MINUS)
_L_B_UP = np.kron(IDENTITY_2, SIGMA_PLUS)
_D_A_DOWN = _dissipator_super(_L_A_DOWN)
_D_A_UP = _dissipator_super(_L_A_UP)
_D_B_DOWN = _dissipator_super(_L_B_DOWN)
_D_B_UP = _dissipator_super(_L_B_UP)


def liouvillian(params: SetupParams) -> np.ndarray:
    """16x16 generator of the thermal dissipators of the active baths."""
    r = rates(params)
    gen = np.zeros((16, 16), dtype=complex)
    if params.bath_a is not None:
        gen += r.gamma_a * (r.nbar_a + 1) * _D_A_DOWN + r.gamma_a * r.nbar_a * _D_A_UP
    if params.bath_b is not None:
        gen += r.gamma_b * (r.nbar_b + 1) * _D_B_DOWN + r.gamma_b * r.nbar_b * _D_B_UP
    return gen


def _check_step(params: SetupParams, dt: float) -> RateSet:
    if not dt > 0:
        raise ConfigError(f"time step must be positive, got {dt}")
    r = rates(params)
    fastest = max(r.decay_a, r.decay_b)
    if dt * fastest >= 0.1:
        raise ConfigError(
            f"time step {dt:.3e} s too large for decay rate {fastest:.3e} s^-1; "
            f"use dt < {0.1 / fastest:.3e} s"
        )
    return r


def _rk4_step_matrix(gen: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step for ``dv/dt = G v`` as a matrix.

    For a linear autonomous system the four RK4 stages collapse to
    ``I + hG + (hG)^2/2 + (hG)^3/6 + (hG)^4/24`` exactly.
    """
    hg = h * gen
    step = np.eye(gen.shape[0], dtype=complex)
    term = step
    for k in range(1, 5):
        term = term @ hg / k
        step = step + term
    return step


def _rk4(gen: np.ndarray, vec: np.ndarray, span: float, dt: float) -> np.ndarray:
    if span <= 0:
        return vec
    n = max(1, math.ceil(span / dt - 1e-12))
    step = _rk4_step_matrix(gen, span / n)
    for _ in range(n):
        m = (step @ vec).reshape(4, 4)
        vec = (0.5 * (m + m.conj().T)).reshape(16)
    return vec


def numerical_lindblad(params: SetupParams, rho0: DensityMatrix, t: float, dt: float) -> DensityMatrix:
    """Integrate the thermal master equation with fixed-step classical RK4.

    The step is shrunk to ``t / ceil(t / dt)`` so the final time is hit
    exactly. Raises ``ConfigError`` when ``dt`` times the fastest population
    decay rate is 0.1 or more.
    """
    return numerical_trajectory(params, rho0, [t], dt)[0]


def numerical_trajectory(
    params: SetupParams, rho0: DensityMatrix, times: Iterable[float], dt: float
) -> list[DensityMatrix]:
    """States at each of ``times`` (ascending, non-negative) from one integration."""
    _check_step(params, dt)
    if rho0.dim != 4:
        raise DomainError("numerical_lindblad propagates two-qubit states")
    ts = [float(t) for t in times]
    if any(t < 0 for t in ts):
        raise DomainError("times must be non-negative")
    if any(b < a for a, b in zip(ts, ts[1:])):
        raise DomainError("times must be sorted ascending")
    gen = liouvillian(params)
    vec = np.array(rho0.matrix, dtype=complex).reshape(16)
    out, now = [], 0.0
    for t in ts:
        vec = _rk4(gen, vec, t - now, dt)
        now = t
        out.append(DensityMatrix(vec.reshape(4, 4)))
    return out


def default_step(params: SetupParams, resolution: float = 0.01) -> float:
    """Step size with ``dt * (fastest relaxation rate) = resolution``."""
    r = rates(params)
    fastest = r.decay_a + r.decay_b
    if fastest == 0:
        return math.inf
    return resolution / fastest


def decoherence_time(params: SetupParams) -> float:
    """``1 / min`` of the active population relaxation rates."""
    r = rates(params)
    active = [k for k, on in ((r.decay_a, params.bath_a), (r.decay_b, params.bath_b)) if on is not None and k > 0]
    return 1.0 / min(active) if active else math.inf


def shared_parameters(triple: Sequence[SetupParams]) -> tuple[float, float, BathSpec, BathSpec]:
    """Validate that (a, b, c) share frequencies and baths; return them."""
    if len(triple) != 3:
        raise ConfigError("expected the three setups (a, b, c)")
    a, b, c = triple
    if (a.setup, b.setup, c.setup) != (Setup.A_AND_B, Setup.A_ONLY, Setup.B_ONLY):
        raise ConfigError("setups must be ordered (a, b, c)")
    if not (a.omega_a == b.omega_a == c.omega_a and a.omega_b == b.omega_b == c.omega_b):
        raise ConfigError("the three setups must share omega_a and omega_b")
    if a.bath_a != b.bath_a or a.bath_b != c.bath_b:
        raise ConfigError("the three setups must share the bath specifications")
    return a.omega_a, a.omega_b, a.bath_a, a.bath_b


__all__ = [
    "HBAR_OVER_KB",
    "BathSpec",
    "EtaFactors",
    "RateSet",
    "Setup",
    "SetupParams",
    "analytic_state",
    "analytic_state_setup_a",
    "analytic_state_setup_b",
    "analytic_state_setup_c",
    "calibrated_dipole_sq",
    "decoherence_rate",
    "decoherence_time",
    "default_step",
    "eta_factors",
    "liouvillian",
    "mean_occupation",
    "numerical_lindblad",
    "numerical_trajectory",
    "rates",
    "setup_params",
    "setup_triple",
    "shared_parameters",
    "singlet_state",
    "spectral_density",
    "stationary_state",
]
