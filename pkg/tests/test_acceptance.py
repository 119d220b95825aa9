"""Acceptance criteria 1-10, one printed PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import functools
import math
import time

import numpy as np

from pairthermo import dynamics, protocol, sampling, thermo
from pairthermo.experiment import runner
from pairthermo.experiment.config import load_config
from pairthermo.qstate import density_diagnostics, singlet_state, system_hamiltonian

SEED = 20240101
ORACLE_TIMES = (0.0, 0.1, 0.5, 1.0, 2.0, 5.0)


def report(number: int, ok: bool, text: str):
    print(f"\nCRITERION {number:2d} {'PASS' if ok else 'FAIL'}: {text}")
    assert ok, text


@functools.lru_cache(maxsize=1)
def oracle_runs():
    """Analytic and numerical states: 20 draws x 3 setups x 6 times, plus the wall time."""
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    runs = []
    for _ in range(20):
        for params in sampling.random_triple(rng):
            tau = dynamics.decoherence_time(params)
            times = [x * tau for x in ORACLE_TIMES]
            num = dynamics.numerical_trajectory(params, singlet_state(), times, dynamics.default_step(params))
            runs += [(params, t, dynamics.analytic_state(params, t), n) for t, n in zip(times, num)]
    return runs, time.perf_counter() - start


def test_criterion_01_oracle_equivalence():
    runs, elapsed = oracle_runs()
    err = max(float(np.max(np.abs(a.matrix - n.matrix))) for _, _, a, n in runs)
    setups = {p.setup.value for p, *_ in runs}
    ok = err < 1e-8 and elapsed < 10.0 and setups == {"a", "b", "c"} and len(runs) == 360
    report(1, ok, f"analytic vs numerical max entry error {err:.2e} (< 1e-8) over {len(runs)} states in {elapsed:.2f} s (< 10 s)")


def test_criterion_02_cptp_invariants():
    runs, _ = oracle_runs()
    herm = trace = 0.0
    low = math.inf
    for _, _, a, n in runs:
        for rho in (a, n):
            d = density_diagnostics(rho)
            herm, trace, low = max(herm, d["hermitian_residual"]), max(trace, d["trace_error"]), min(low, d["min_eigenvalue"])
    ok = herm < 1e-12 and trace < 1e-12 and low > -1e-10
    report(2, ok, f"hermiticity {herm:.1e} (< 1e-12), trace {trace:.1e} (< 1e-12), min eigenvalue {low:.1e} (> -1e-10) on {2 * len(runs)} states")


def test_criterion_03_first_law_closure():
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    count = 0
    for _ in range(100):
        triple = sampling.random_triple(rng)
        h = system_hamiltonian(triple[0].omega_a, triple[0].omega_b)
        for params in triple:
            t = rng.uniform(0, 5) * dynamics.decoherence_time(params)
            led = thermo.first_law_ledger(singlet_state(), dynamics.analytic_state(params, t), h)
            assert led.adiabatic_work == 0.0
            worst = max(worst, led.closure_residual)
            count += 1
    report(3, worst < 1e-9, f"dE = dW + Q_op relative residual {worst:.1e} (< 1e-9) on {count} evolutions")


def test_criterion_04_energy_additivity():
    runs, _ = oracle_runs()
    additivity = closed = 0.0
    for params, t, rho, _ in runs:
        triple = dynamics.setup_triple(params.omega_a, params.omega_b, *_baths(params, runs))
        h = system_hamiltonian(params.omega_a, params.omega_b)
        energies = [thermo.internal_energy(dynamics.analytic_state(p, t), h) for p in triple]
        additivity = max(additivity, abs(energies[0] - energies[1] - energies[2]) / params.omega_a)
        ref = thermo.delta_e_analytic(params.setup, dynamics.rates(params), params.omega_a, params.omega_b, t)
        closed = max(closed, abs(ref - thermo.internal_energy(rho, h)) / params.omega_a)
    ok = additivity < 1e-10 and closed < 1e-10
    report(4, ok, f"dE_a - dE_b - dE_c = {additivity:.1e} and closed-form mismatch {closed:.1e} (both < 1e-10, relative to wA)")


def _baths(params, runs):
    """Baths of the draw ``params`` belongs to (setup a carries both)."""
    for p, *_ in runs:
        if p.setup.value == "a" and p.omega_a == params.omega_a and p.omega_b == params.omega_b:
            return p.bath_a, p.bath_b
    raise LookupError("no setup-a run for this draw")


def test_criterion_05_locality_gap_signature():
    cfg = load_config(None, {"points": 201})
    table = runner.run_simulate(cfg)
    gap_dw = np.abs(table.column("gap_dW [1/s]"))
    gap_w = np.abs(table.column("gap_W [1/s]"))
    conc = table.column("concurrence_a [1]")
    scale_minus = 0.5 * (cfg.omega_a - cfg.omega_b)
    scale_plus = 0.5 * (cfg.omega_a + cfg.omega_b)
    exists = float(gap_dw.max()) > 0.01 * scale_minus
    tail = gap_w[conc < 1e-3]
    shrinking = bool(np.all(np.diff(tail) <= 1e-12 * scale_plus))
    limit = float(tail[-1]) / scale_plus
    ok = exists and shrinking and limit < 1e-3
    report(
        5,
        ok,
        f"max |gap_dW| = {gap_dw.max() / scale_minus:.3f} x (wA-wB)/2 (> 0.01); tail |gap_W| non-increasing: {shrinking}; "
        f"tail limit {limit:.2e} x (wA+wB)/2 (needs < 1e-3)",
    )


def test_criterion_06_product_state_factorization():
    rng = np.random.default_rng(SEED + 6)
    worst = 0.0
    for _ in range(500):
        ra, rb = sampling.random_density(rng, 2), sampling.random_density(rng, 2)
        wa = rng.uniform(1e12, 3e12)
        h = system_hamiltonian(wa, wa * rng.uniform(0.3, 0.99))
        worst = max(worst, abs(thermo.factorization_check(ra, rb, h).difference) / wa)
    report(6, worst < 1e-10, f"max |W - W_A - W_B| / wA = {worst:.2e} (< 1e-10) on 500 random product states")


def test_criterion_07_temperature_trends():
    cfg = load_config(None, {})
    common = runner.run_sweep_temperature(cfg, "common")
    dw = common.column("dW_a [1/s]")
    hotter_loses_more = bool(np.all(np.diff(dw) < 0))
    peaks = runner.peak_violation(runner.run_sweep_temperature(cfg, "delta"))
    growing = peaks[100.0] < peaks[300.0] < peaks[500.0]
    ok = hotter_loses_more and growing
    report(
        7,
        ok,
        f"dW_a strictly decreasing over 100-900 K: {hotter_loses_more}; peak |gap_dW| at dT=100/300/500 K: "
        f"{peaks[100.0]:.6e} < {peaks[300.0]:.6e} < {peaks[500.0]:.6e}: {growing}",
    )


def test_criterion_08_ergotropy_oracle():
    rng = np.random.default_rng(SEED + 8)
    worst = 0.0
    for _ in range(1000):
        dim = int(rng.choice([2, 4]))
        rho = sampling.random_density(rng, dim, rank=int(rng.integers(1, dim + 1)))
        h = sampling.random_hamiltonian(rng, dim)
        scale = float(np.max(np.abs(h.energies)))
        worst = max(worst, abs(thermo.ergotropy(rho, h) - thermo.ergotropy_overlap_sum(rho, h)) / scale)
    h = system_hamiltonian(2e12, 1e12)
    singlet = thermo.ergotropy(singlet_state(), h)
    ok = worst < 1e-10 and singlet == 1.5e12
    report(8, ok, f"double-sum vs trace route {worst:.1e} (< 1e-10) on 1000 draws; singlet ergotropy {singlet!r} (= 1.5e12)")


def test_criterion_09_protocol():
    h = system_hamiltonian(2e12, 1e12)
    rho = singlet_state()
    start = time.perf_counter()
    trace = protocol.run_protocol(rho, h, 300.0, 10_000)
    elapsed = time.perf_counter() - start
    w = thermo.ergotropy(rho, h)
    passive = trace.passive.matrix
    d_f = protocol.free_energy(rho, h, 300.0) - protocol.free_energy(passive, h, 300.0)
    work_err = abs(trace.stage1_work - w) / w
    free_err = abs(d_f - trace.stage1_work) / abs(trace.stage1_work)
    ok = work_err < 1e-10 and free_err < 1e-9 and trace.final_distance < 1e-4 and trace.audit_residual() < 1e-9 and elapsed < 5.0
    report(
        9,
        ok,
        f"stage-1 work vs ergotropy {work_err:.1e} (< 1e-10), vs free-energy loss {free_err:.1e} (< 1e-9); "
        f"final TV distance {trace.final_distance:.1e} (< 1e-4); audit {trace.audit_residual():.1e} (< 1e-9); {elapsed:.2f} s (< 5 s)",
    )


def test_criterion_10_closed_form_diagnostic():
    triple = dynamics.setup_triple()
    sides = thermo.locality_sides(triple, 1e-7)
    produced = all(math.isfinite(x) for x in (sides.lhs, sides.rhs)) and not (
        math.isnan(sides.lhs_closed) and math.isnan(sides.rhs_closed)
    )
    report(
        10,
        produced,
        f"(informational) t=1e-7 s lhs state={sides.lhs:.6e} closed={sides.lhs_closed:.6e} (rel dev {sides.lhs_deviation:.3g}); "
        f"rhs state={sides.rhs:.6e} closed={sides.rhs_closed:.6e} (rel dev {sides.rhs_deviation:.3g})",
    )
