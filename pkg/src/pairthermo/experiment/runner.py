"""Simulation runs that turn a config into CSV tables and gnuplot scripts."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .. import dynamics, protocol, thermo
from ..dynamics import Setup
from ..qstate import concurrence, density_diagnostics, singlet_state, system_hamiltonian
from .config import SCHEMA_VERSION, ExperimentConfig

SETUP_LABEL = {Setup.A_AND_B: "a", Setup.A_ONLY: "b", Setup.B_ONLY: "c"}


class Table:
    """Rows plus the metadata needed to write a reproducible CSV."""

    def __init__(self, kind: str, columns: list[str], rows: list[list], config: ExperimentConfig, notes=()):
        self.kind = kind
        self.columns = columns
        self.rows = rows
        self.config = config
        self.notes = list(notes)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def render(self) -> str:
        buf = io.StringIO()
        buf.write(f"# pairthermo {self.kind}\n")
        buf.write(f"# schema: pairthermo-{self.kind}/{SCHEMA_VERSION}\n")
        buf.write("# units: times in s, temperatures in K, energies in s^-1 (hbar = 1)\n")
        buf.write(f"# config: {self.config.to_json()}\n")
        for note in self.notes:
            buf.write(f"# {note}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(x) for x in row])
        return buf.getvalue()

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(self.render(), encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        return path


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _map(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- simulate --------------------------------------------------------------

def _simulate_row(job):
    cfg, t = job
    triple = cfg.triple()
    h = system_hamiltonian(cfg.omega_a, cfg.omega_b)
    rho0 = singlet_state()
    row = [t]
    chosen = cfg.selected_setups()
    for params in triple:
        if params.setup not in chosen:
            continue
        rho = dynamics.analytic_state(params, t)
        ledger = thermo.first_law_ledger(rho0, rho, h)
        diag = density_diagnostics(rho)
        row += [
            thermo.internal_energy(rho, h),
            ledger.delta_energy,
            thermo.ergotropy(rho, h),
            ledger.delta_ergotropy,
            ledger.operational_heat,
            ledger.closure_residual,
            concurrence(rho),
            diag["min_eigenvalue"],
            diag["trace_error"],
        ]
    if len(chosen) == 3:
        g = thermo.gap_report(triple, t)
        row += [g.gap_W, g.gap_dW]
    return row


def simulate_columns(cfg: ExperimentConfig) -> list[str]:
    cols = ["t [s]"]
    for s in cfg.selected_setups():
        x = SETUP_LABEL[s]
        cols += [
            f"E_{x} [1/s]",
            f"dE_{x} [1/s]",
            f"W_{x} [1/s]",
            f"dW_{x} [1/s]",
            f"Qop_{x} [1/s]",
            f"ledger_residual_{x} [1]",
            f"concurrence_{x} [1]",
            f"min_eig_{x} [1]",
            f"trace_err_{x} [1]",
        ]
    if len(cfg.selected_setups()) == 3:
        cols += ["gap_W [1/s]", "gap_dW [1/s]"]
    return cols


def run_simulate(cfg: ExperimentConfig) -> Table:
    """One row per grid time with energies, ledgers and the locality gap.

    Setup labels in column names: ``a`` both baths, ``b`` Alice only,
    ``c`` Bob only. ``gap_W = W_a - W_b - W_c`` and
    ``gap_dW = dW_a - dW_b - dW_c`` appear when all three setups run.
    """
    rows = _map(_simulate_row, [(cfg, float(t)) for t in cfg.time_grid()], cfg.workers)
    rows.sort(key=lambda r: r[0])
    return Table("simulate", simulate_columns(cfg), rows, cfg)


# --- temperature sweeps -------------------------------------------------------

def _common_row(job):
    cfg, temp = job
    g = thermo.gap_report(cfg.triple(temp, temp), cfg.eval_time)
    return [temp, g.dW, g.dW_alice, g.dW_bob, g.dW_alice + g.dW_bob, g.gap_dW, g.gap_W, g.concurrence_a]


def _delta_row(job):
    cfg, d_t, t = job
    t_a = cfg.sweep_mean_temperature - d_t / 2
    t_b = cfg.sweep_mean_temperature + d_t / 2
    g = thermo.gap_report(cfg.triple(t_a, t_b), t)
    return [d_t, t_a, t_b, t, g.gap_W, g.gap_dW, g.concurrence_a]


def run_sweep_temperature(cfg: ExperimentConfig, mode: str | None = None) -> Table:
    """Ergotropy changes versus bath temperature.

    ``common``: both baths at the same ``T``, evaluated at ``eval_time``.
    ``delta``: ``T_B - T_A`` varied at fixed mean, full time series per value.
    """
    mode = mode or cfg.sweep_mode
    if mode == "common":
        jobs = [(cfg, float(t)) for t in cfg.sweep_temperatures]
        rows = _map(_common_row, jobs, cfg.workers)
        rows.sort(key=lambda r: r[0])
        cols = [
            "T [K]",
            "dW_a [1/s]",
            "dW_b [1/s]",
            "dW_c [1/s]",
            "dW_b+dW_c [1/s]",
            "gap_dW [1/s]",
            "gap_W [1/s]",
            "concurrence_a [1]",
        ]
        return Table("sweep-common", cols, rows, cfg, notes=[f"eval_time: {cfg.eval_time!r} s"])
    if mode == "delta":
        grid = cfg.time_grid()
        jobs = [(cfg, float(d), float(t)) for d in cfg.sweep_delta_t for t in grid]
        rows = _map(_delta_row, jobs, cfg.workers)
        rows.sort(key=lambda r: (r[0], r[3]))
        cols = ["dT [K]", "T_A [K]", "T_B [K]", "t [s]", "gap_W [1/s]", "gap_dW [1/s]", "concurrence_a [1]"]
        table = Table("sweep-delta", cols, rows, cfg)
        for d, peak in peak_violation(table).items():
            table.notes.append(f"peak |gap_dW| at dT={d!r} K: {peak!r} 1/s")
        return table
    raise ValueError(f"unknown sweep mode {mode!r}")


def peak_violation(table: Table) -> dict:
    """``max_t |dW - dW_a - dW_b|`` for each temperature difference."""
    d_t = table.column("dT [K]")
    gap = np.abs(table.column("gap_dW [1/s]"))
    return {float(d): float(gap[d_t == d].max()) for d in sorted(set(d_t))}


# --- protocol ---------------------------------------------------------------

def run_protocol(cfg: ExperimentConfig):
    """Two-stage protocol from the state of ``protocol_setup`` at ``protocol_time``.

    Returns the table (one row per bath-qubit swap) and a summary dict.
    """
    triple = cfg.triple()
    params = next(p for p in triple if p.setup is Setup.parse(cfg.protocol_setup))
    rho = dynamics.analytic_state(params, cfg.protocol_time)
    h = system_hamiltonian(cfg.omega_a, cfg.omega_b)
    trace = protocol.run_protocol(rho, h, cfg.protocol_temperature, cfg.protocol_steps)
    rows = []
    for s in trace.swaps:
        rows.append(
            [s.step, s.lower, s.shift, s.qubit.p0, s.qubit.p1, s.qubit.gap, s.heat, s.work, s.energy_change,
             *s.populations, trace.distances[s.step]]
        )
    cols = [
        "step [1]",
        "lower_level [1]",
        "shift [1]",
        "bath_p0 [1]",
        "bath_p1 [1]",
        "bath_gap [1/s]",
        "heat [1/s]",
        "work_to_weight [1/s]",
        "energy_change [1/s]",
        *[f"r{i} [1]" for i in range(h.dim)],
        "tv_distance [1]",
    ]
    summary = {
        "stage1_work": trace.stage1_work,
        "ergotropy": thermo.ergotropy(rho, h),
        "total_heat": trace.total_heat,
        "total_work": trace.total_work,
        "stage2_energy_change": trace.stage2_energy_change,
        "final_tv_distance": trace.final_distance,
        "audit_residual": trace.audit_residual(),
    }
    notes = [
        "sign convention: heat > 0 when the system takes energy from the bath qubit; "
        "work_to_weight > 0 when the weight is raised; energy_change = heat - work_to_weight",
        "summary: " + " ".join(f"{k}={v!r}" for k, v in summary.items()),
    ]
    return Table("protocol", cols, rows, cfg, notes), summary


# --- plotting scripts -----------------------------------------------------------

def gnuplot_script(table: Table, csv_name: str) -> str:
    """Gnuplot commands reproducing the figure for ``table``."""
    head = [
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        "set grid",
    ]
    src = f"'{csv_name}'"
    cols = table.columns

    def idx(name):
        return cols.index(name) + 1

    if table.kind == "simulate":
        head += ["set logscale x", "set xlabel 't [s]'", "set ylabel 'energy [1/s]'"]
        series = []
        if "gap_W [1/s]" in cols:
            series.append(f"{src} every ::1 using 1:{idx('W_a [1/s]')} with lines title 'W'")
            series.append(
                f"{src} every ::1 using 1:(${idx('W_b [1/s]')}+${idx('W_c [1/s]')}) with lines dt 2 title 'W_A+W_B'"
            )
            series.append(f"{src} every ::1 using 1:{idx('dW_a [1/s]')} with lines title 'dW'")
            series.append(
                f"{src} every ::1 using 1:(${idx('dW_b [1/s]')}+${idx('dW_c [1/s]')}) with lines title 'dW_A+dW_B'"
            )
        else:
            for c in cols:
                if c.startswith("W_"):
                    series.append(f"{src} every ::1 using 1:{idx(c)} with lines")
        return "\n".join(head + ["plot " + ", \\\n     ".join(series)]) + "\n"
    if table.kind == "sweep-common":
        head += ["set xlabel 'T [K]'", "set ylabel 'ergotropy change [1/s]'"]
        series = [
            f"{src} using 1:{idx('dW_a [1/s]')} with linespoints title 'dW'",
            f"{src} using 1:{idx('dW_b [1/s]')} with linespoints title 'dW_A'",
            f"{src} using 1:{idx('dW_b+dW_c [1/s]')} with linespoints title 'dW_A+dW_B'",
        ]
        return "\n".join(head + ["plot " + ", \\\n     ".join(series)]) + "\n"
    if table.kind == "sweep-delta":
        head += ["set logscale x", "set xlabel 't [s]'", "set ylabel 'W - W_A - W_B [1/s]'"]
        d_ts = sorted(set(table.column("dT [K]")))
        series = [
            f"{src} using ($1=={d!r} ? $4 : 1/0):5 with lines title 'T_B-T_A={d:g} K'" for d in d_ts
        ]
        return "\n".join(head + ["plot " + ", \\\n     ".join(series)]) + "\n"
    if table.kind == "protocol":
        head += ["set xlabel 'step'", "set ylabel 'population'"]
        first = idx("r0 [1]")
        series = [f"{src} using 1:{first + i} with lines title 'r{i}'" for i in range(4)]
        return "\n".join(head + ["plot " + ", \\\n     ".join(series)]) + "\n"
    raise ValueError(f"no plot recipe for {table.kind}")


def write_outputs(table: Table, path: str | Path) -> tuple[Path, Path]:
    """Write the CSV and its sibling ``.gp`` script."""
    csv_path = table.write(path)
    gp_path = csv_path.with_suffix(".gp")
    try:
        gp_path.write_text(gnuplot_script(table, csv_path.name), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {gp_path}: {exc}") from exc
    return csv_path, gp_path


__all__ = [
    "Table",
    "gnuplot_script",
    "peak_violation",
    "run_protocol",
    "run_simulate",
    "run_sweep_temperature",
    "write_outputs",
]
