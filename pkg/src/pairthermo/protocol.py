"""Two-stage work extraction and thermalization.

Stage 1 rotates the system unitarily onto its passive state and stores the
released energy in a weight. The unitary maps the n-th eigenvector of the
state onto the n-th energy level, so the weight is displaced by
``<r_n|H|r_n> - e_n`` in branch ``n`` (probability ``r_n``). Only average
energies of the weight are ever needed, so it is tracked as energy
bookkeeping over those branches.

Stage 2 walks the passive populations to the Gibbs populations at ``T`` in
``N`` small steps. Each step is realized by swapping an adjacent level pair
with a thermal qubit whose gap is chosen so that its Gibbs populations have
the pair's target ratio; the energy mismatch goes to the weight.

Sign conventions of a stage-2 step: ``heat`` is the energy the system draws
from the bath qubit (positive when the system is excited), ``work`` is the
energy deposited in the weight, and ``system energy change = heat - work``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dynamics
from .errors import DomainError
from .qstate import DensityMatrix, HamiltonianOperator
from .thermo import PassiveState, _passive_from_populations, gibbs_populations, internal_energy, passive_state


def _kt(temperature: float) -> float:
    """``k_B T / hbar`` in s^-1."""
    return temperature / dynamics.HBAR_OVER_KB


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """``-sum r ln r`` in nats, with ``0 ln 0 = 0``."""
    r = np.clip(rho.eigenvalues(), 0.0, None)
    r = r[r > 0]
    return float(-np.sum(r * np.log(r)))


def free_energy(rho: DensityMatrix, h: HamiltonianOperator, temperature: float) -> float:
    """``tr[rho H] - (k_B T / hbar) S(rho)`` in s^-1."""
    if not temperature > 0:
        raise DomainError(f"free energy needs a positive temperature, got {temperature}")
    return internal_energy(rho, h) - _kt(temperature) * von_neumann_entropy(rho)


@dataclass(frozen=True)
class WeightLedger:
    """Average energy handed to the weight, with per-branch displacements."""

    mean_energy_gain: float
    offsets: np.ndarray
    probabilities: np.ndarray


def stage1_extract(rho: DensityMatrix, h: HamiltonianOperator) -> tuple[PassiveState, WeightLedger]:
    passive = passive_state(rho, h)
    spec = rho.spectrum()
    expect = np.real(np.einsum("in,ij,jn->n", spec.vectors.conj(), h.matrix, spec.vectors))
    offsets = expect - h.energies
    gain = float(np.dot(spec.values, offsets))
    return passive, WeightLedger(gain, offsets, np.array(spec.values))


@dataclass(frozen=True)
class ThermalQubit:
    p0: float
    p1: float
    gap: float


@dataclass(frozen=True)
class SwapRecord:
    step: int
    lower: int
    shift: float          # population moved from level ``lower`` to ``lower + 1``
    qubit: ThermalQubit
    heat: float
    work: float
    energy_change: float
    populations: tuple


@dataclass
class ProtocolTrace:
    initial_state: DensityMatrix
    passive: PassiveState
    stage1_work: float
    temperature: float
    swaps: list[SwapRecord] = field(default_factory=list)
    distances: list[float] = field(default_factory=list)
    final_populations: np.ndarray | None = None
    target_populations: np.ndarray | None = None

    @property
    def total_heat(self) -> float:
        return math.fsum(s.heat for s in self.swaps)

    @property
    def total_work(self) -> float:
        """Energy deposited in the weight during stage 2."""
        return math.fsum(s.work for s in self.swaps)

    @property
    def stage2_energy_change(self) -> float:
        return math.fsum(s.energy_change for s in self.swaps)

    @property
    def final_distance(self) -> float:
        return self.distances[-1] if self.distances else 0.0

    def audit_residual(self) -> float:
        """Relative mismatch of ``sum(energy change) = sum(heat) - sum(work)``."""
        lhs = self.stage2_energy_change
        rhs = self.total_heat - self.total_work
        scale = max(abs(lhs), abs(self.total_heat), abs(self.total_work), 1e-300)
        return abs(lhs - rhs) / scale


def total_variation(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))


def _bath_qubit(lower_pop: float, upper_pop: float, temperature: float) -> ThermalQubit:
    total = lower_pop + upper_pop
    p0, p1 = lower_pop / total, upper_pop / total
    if p1 == 0.0:
        gap = math.inf
    else:
        gap = _kt(temperature) * math.log(p0 / p1)
    return ThermalQubit(p0, p1, gap)


def stage2_thermalize(
    passive: PassiveState,
    h: HamiltonianOperator,
    temperature: float,
    steps: int,
    initial_state: DensityMatrix | None = None,
    stage1_work: float = 0.0,
) -> ProtocolTrace:
    """Drive passive populations to ``Gibbs(H, T)`` in ``steps`` equal increments.

    Each increment is a sequence of adjacent-pair swaps (one thermal qubit
    per pair) carrying the population flow ``lower -> lower + 1``. The
    populations after increment ``k`` are
    ``p_k = p_0 + (k / N) (p_gibbs - p_0)``, so the distance to the target
    shrinks linearly and reaches zero at ``k = N``.
    """
    if steps < 1:
        raise DomainError("stage 2 needs at least one step")
    if not temperature > 0:
        raise DomainError(f"temperature must be positive, got {temperature}")
    if passive.matrix.dim != h.dim:
        raise DomainError("passive state and Hamiltonian dimensions differ")
    energies = h.energies
    start = np.array(passive.populations, dtype=float)
    target = gibbs_populations(energies, temperature)
    trace = ProtocolTrace(
        initial_state=initial_state if initial_state is not None else passive.matrix,
        passive=passive,
        stage1_work=stage1_work,
        temperature=temperature,
        target_populations=target,
    )
    pops = start.copy()
    trace.distances.append(total_variation(pops, target))
    for k in range(1, steps + 1):
        goal = start + (k / steps) * (target - start)
        # flow across the bond (i, i+1) needed to turn ``pops`` into ``goal``
        flows = np.cumsum(pops - goal)[:-1]
        for i, shift in enumerate(flows):
            before = float(np.dot(pops, energies))
            pops[i] -= shift
            pops[i + 1] += shift
            qubit = _bath_qubit(pops[i], pops[i + 1], temperature)
            # bath qubit drops |1> -> |0> with net probability ``shift``
            heat = shift * qubit.gap if shift != 0.0 else 0.0
            displacement = qubit.gap - (energies[i + 1] - energies[i])
            trace.swaps.append(
                SwapRecord(
                    step=k,
                    lower=i,
                    shift=float(shift),
                    qubit=qubit,
                    heat=heat,
                    work=shift * displacement if shift != 0.0 else 0.0,
                    energy_change=float(np.dot(pops, energies)) - before,
                    populations=tuple(float(x) for x in pops),
                )
            )
        pops = np.clip(pops, 0.0, None)
        trace.distances.append(total_variation(pops, target))
    trace.final_populations = pops
    return trace


def run_protocol(rho: DensityMatrix, h: HamiltonianOperator, temperature: float, steps: int) -> ProtocolTrace:
    """Stage 1 followed by stage 2, starting from ``rho``."""
    passive, ledger = stage1_extract(rho, h)
    return stage2_thermalize(passive, h, temperature, steps, initial_state=rho, stage1_work=ledger.mean_energy_gain)


def final_state(trace: ProtocolTrace, h: HamiltonianOperator) -> DensityMatrix:
    return _passive_from_populations(trace.final_populations, h).matrix
