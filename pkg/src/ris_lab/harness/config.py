"""TOML configuration loading with fail-fast validation.

Three optional tables: [scenario] (deployment constants), [allocation]
(scheduling constraints; rate floor given in Mbps and converted to the
per-slot natural-log units the scheduler works in), and [experiment] (preset
name, sweeps, trials, seed, output directory). Unknown keys are rejected by
name so sweep typos fail immediately; an empty file yields all defaults.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..allocation import AllocationConfig
from ..channel import Scenario
from ..modulation import build_symbol_set

EXPERIMENT_NAMES = (
    "fig4-ratio",
    "fig5-mrt-ratio",
    "fig6-ser",
    "fig7-convergence",
    "fig8-individual",
    "fig9-sumrate",
    "custom",
)


class ConfigError(ValueError):
    """Configuration parse or validation failure."""


@dataclass
class ExperimentSpec:
    """One experiment run: preset name, sweep axes, and orchestration knobs."""

    name: str = "fig6-ser"
    trials: int = 20000
    seed: int = 1
    output_dir: str = "results"
    slots: int = 2000
    snr_mode: str = "ideal-upper"
    n_list: list[int] = field(default_factory=lambda: [16, 32])
    b_list: list[object] = field(default_factory=lambda: [1, "inf"])
    snr_db_list: list[float] = field(
        default_factory=lambda: [0.0, 3.0, 6.0, 9.0, 12.0, 15.0, 18.0, 21.0, 24.0]
    )
    k_list: list[int] = field(default_factory=lambda: [4])
    m_list: list[int] = field(default_factory=lambda: [2, 4])
    n_s: int = 1

    def __post_init__(self):
        if self.name not in EXPERIMENT_NAMES:
            raise ConfigError(
                f"unknown experiment {self.name!r}; expected one of {EXPERIMENT_NAMES}"
            )
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.slots < 1:
            raise ConfigError("slots must be >= 1")
        if self.snr_mode not in ("ideal-upper", "alg1"):
            raise ConfigError(f"unknown snr_mode {self.snr_mode!r}")
        for name in ("n_list", "b_list", "snr_db_list", "k_list", "m_list"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must not be empty")
        for n in self.n_list:
            if not isinstance(n, int) or n < 1:
                raise ConfigError(f"n_list entries must be positive integers, got {n}")
        for b in self.b_list:
            if b != "inf" and (not isinstance(b, int) or b < 1):
                raise ConfigError(f"b_list entries must be positive integers or 'inf', got {b}")
        if self.n_s < 1:
            raise ConfigError("n_s must be >= 1")


@dataclass
class LoadedConfig:
    scenario: Scenario
    allocation: AllocationConfig
    experiment: ExperimentSpec
    min_rate_mbps: float


_ALLOCATION_KEYS = {
    "min_rate_mbps": 20.0,
    "avg_power_w": 4.0,
    "max_power_w": 4.0,
    "alpha": 0.1,
    "n_s": 12,
    "phase_bits": 1,
    "host_modulation": "bpsk",
    "order_exponent": 2,
}


def _build_dataclass(cls, table: dict, label: str):
    known = {f.name: f for f in dataclasses.fields(cls)}
    for key in table:
        if key not in known:
            raise ConfigError(f"unknown key {key!r} in [{label}]")
    try:
        return cls(**table)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[{label}]: {exc}") from exc


def load_config(path) -> LoadedConfig:
    """Parse and validate a config file; empty or missing tables mean defaults."""
    raw = Path(path).read_bytes()
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    for table in data:
        if table not in ("scenario", "allocation", "experiment"):
            raise ConfigError(f"unknown table [{table}]")

    scenario = _build_dataclass(Scenario, data.get("scenario", {}), "scenario")
    experiment = _build_dataclass(
        ExperimentSpec, data.get("experiment", {}), "experiment"
    )

    alloc_raw = dict(data.get("allocation", {}))
    for key in alloc_raw:
        if key not in _ALLOCATION_KEYS:
            raise ConfigError(f"unknown key {key!r} in [allocation]")
    merged = {**_ALLOCATION_KEYS, **alloc_raw}
    min_rate_mbps = float(merged["min_rate_mbps"])
    if min_rate_mbps < 0:
        raise ConfigError("[allocation]: min_rate_mbps must be >= 0")
    try:
        symbol_set = build_symbol_set(
            merged["host_modulation"], int(merged["order_exponent"])
        )
        allocation = AllocationConfig(
            min_rate=mbps_to_nats(min_rate_mbps, scenario),
            avg_power=float(merged["avg_power_w"]),
            max_power=float(merged["max_power_w"]),
            alpha=float(merged["alpha"]),
            n_s=int(merged["n_s"]),
            phase_bits=int(merged["phase_bits"]),
            symbol_set=symbol_set,
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[allocation]: {exc}") from exc

    return LoadedConfig(
        scenario=scenario,
        allocation=allocation,
        experiment=experiment,
        min_rate_mbps=min_rate_mbps,
    )


def mbps_to_nats(mbps: float, scenario: Scenario) -> float:
    """Convert a bits/s requirement to the per-slot natural-log rate units."""
    return mbps * 1e6 * math.log(2.0) / scenario.rb_bandwidth_hz


def nats_to_mbps(nats: float, scenario: Scenario) -> float:
    return nats * scenario.rb_bandwidth_hz / math.log(2.0) / 1e6
