"""Experiment configuration: JSON file + CLI overrides on top of defaults."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import dynamics
from ..dynamics import BathSpec, Setup
from ..errors import ConfigError

SCHEMA_VERSION = 1


@dataclass
class ExperimentConfig:
    setups: list = field(default_factory=lambda: ["a", "b", "c"])
    omega_a: float = dynamics.OMEGA_A_DEFAULT
    omega_b: float = dynamics.OMEGA_B_DEFAULT
    t_a: float = dynamics.T_A_DEFAULT
    t_b: float = dynamics.T_B_DEFAULT
    # bath coupling; dipole_sq = None means "calibrated"
    cutoff_ratio: float = dynamics.DEFAULT_CUTOFF_RATIO
    coupling: float = dynamics.DEFAULT_COUPLING
    dipole_sq: float | None = None
    gamma_a: float | None = None
    gamma_b: float | None = None
    # time grid
    t_min: float = 1e-10
    t_max: float = 1e-5
    points: int = 101
    log: bool = True
    include_zero: bool = True
    # temperature sweeps
    sweep_mode: str = "common"
    sweep_temperatures: list = field(default_factory=lambda: [100.0 * k for k in range(1, 10)])
    sweep_delta_t: list = field(default_factory=lambda: [0.0, 100.0, 300.0, 500.0])
    sweep_mean_temperature: float = 450.0
    eval_time: float = 1e-7
    # protocol
    protocol_temperature: float = 300.0
    protocol_steps: int = 10_000
    protocol_setup: str = "a"
    protocol_time: float = 0.0
    # run control
    output: str = "results.csv"
    seed: int = 20240101
    workers: int = 1

    def violations(self) -> list[str]:
        """Every problem with this config (empty when valid)."""
        bad = []
        for s in self.setups:
            if str(s).lower() not in ("a", "b", "c"):
                bad.append(f"setups: unknown setup {s!r}")
        if not self.setups:
            bad.append("setups: at least one setup is required")
        for name in ("omega_a", "omega_b", "cutoff_ratio"):
            if not _finite(getattr(self, name)) or getattr(self, name) <= 0:
                bad.append(f"{name}: must be a positive number")
        for name in ("t_a", "t_b", "coupling"):
            if not _finite(getattr(self, name)) or getattr(self, name) < 0:
                bad.append(f"{name}: must be a non-negative number")
        for name in ("dipole_sq", "gamma_a", "gamma_b"):
            v = getattr(self, name)
            if v is not None and (not _finite(v) or v < 0):
                bad.append(f"{name}: must be a non-negative number or null")
        if not isinstance(self.points, int) or self.points < 2:
            bad.append("points: need at least 2 grid points")
        if not _finite(self.t_min) or self.t_min < 0:
            bad.append("t_min: must be >= 0")
        if not _finite(self.t_max) or self.t_max <= self.t_min:
            bad.append("t_max: must exceed t_min")
        if self.log and not self.t_min > 0:
            bad.append("t_min: logarithmic grids need t_min > 0")
        if self.sweep_mode not in ("common", "delta"):
            bad.append("sweep_mode: must be 'common' or 'delta'")
        if any(not _finite(t) or t <= 0 for t in self.sweep_temperatures):
            bad.append("sweep_temperatures: temperatures must be positive")
        if any(not _finite(d) or d < 0 for d in self.sweep_delta_t):
            bad.append("sweep_delta_t: differences must be non-negative")
        elif any(self.sweep_mean_temperature - d / 2 <= 0 for d in self.sweep_delta_t):
            bad.append("sweep_delta_t: every T_A = mean - dT/2 must stay positive")
        if not _finite(self.eval_time) or self.eval_time < 0:
            bad.append("eval_time: must be >= 0")
        if not _finite(self.protocol_temperature) or self.protocol_temperature <= 0:
            bad.append("protocol_temperature: must be positive")
        if not isinstance(self.protocol_steps, int) or self.protocol_steps < 1:
            bad.append("protocol_steps: must be a positive integer")
        if str(self.protocol_setup).lower() not in ("a", "b", "c"):
            bad.append("protocol_setup: must be a, b or c")
        if not _finite(self.protocol_time) or self.protocol_time < 0:
            bad.append("protocol_time: must be >= 0")
        if not isinstance(self.workers, int) or self.workers < 1:
            bad.append("workers: must be a positive integer")
        return bad

    def validate(self) -> "ExperimentConfig":
        bad = self.violations()
        if bad:
            raise ConfigError("invalid configuration:\n  " + "\n  ".join(bad))
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    # --- derived objects ---------------------------------------------------

    def bath(self, which: str, temperature: float | None = None) -> BathSpec:
        temp = (self.t_a if which == "a" else self.t_b) if temperature is None else temperature
        override = self.gamma_a if which == "a" else self.gamma_b
        return BathSpec(temp, self.cutoff_ratio, self.coupling, self.dipole_sq, override)

    def triple(self, t_a: float | None = None, t_b: float | None = None):
        return dynamics.setup_triple(self.omega_a, self.omega_b, self.bath("a", t_a), self.bath("b", t_b))

    def selected_setups(self) -> list[Setup]:
        chosen = {Setup.parse(s) for s in self.setups}
        return [s for s in Setup if s in chosen]

    def time_grid(self) -> np.ndarray:
        if self.log:
            grid = np.logspace(math.log10(self.t_min), math.log10(self.t_max), self.points)
        else:
            grid = np.linspace(self.t_min, self.t_max, self.points)
        if self.include_zero and grid[0] > 0:
            grid = np.concatenate([[0.0], grid])
        return grid


def _finite(x) -> bool:
    try:
        return math.isfinite(float(x))
    except (TypeError, ValueError):
        return False


_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def from_dict(data: dict, base: ExperimentConfig | None = None) -> ExperimentConfig:
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    cfg = dataclasses.replace(base or ExperimentConfig(), **data)
    if isinstance(cfg.setups, str):
        cfg.setups = ["a", "b", "c"] if cfg.setups == "all" else [cfg.setups]
    return cfg


def load_config(path: str | Path | None, overrides: dict | None = None) -> ExperimentConfig:
    """Defaults, then the JSON file at ``path``, then ``overrides``; validated."""
    cfg = ExperimentConfig()
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        cfg = from_dict(data, cfg)
    if overrides:
        cfg = from_dict({k: v for k, v in overrides.items() if v is not None}, cfg)
    return cfg.validate()
