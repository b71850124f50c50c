"""Declarative scenario configs: TOML ingest, unit conversion, validation.

Every dimensioned quantity is a string with an explicit unit tag
(e.g. ``kappa_a = "2.09 MHz"``); ordinary-frequency tags are converted to
angular units with a factor 2*pi on ingest.  Dimensionless knobs are plain
numbers whose field names carry the convention (``kappa_m_t_m``,
``gamma_b0_z``, grid bounds in units of kappa_m).  Unknown keys are rejected
with the offending path.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ConfigError
from .model import (FieldPulse, SqueezeParams, SystemParams, epsilon_b_default)

TWO_PI = 2.0 * math.pi

TASKS = ("steady-spectrum", "transient-spectrum", "noise-ratio", "snr",
         "nsphere", "reconstruct", "sweep", "figure-data")

# unit tag -> (kind, factor to internal units)
_UNIT_FACTORS = {
    "frequency": {
        "Hz": TWO_PI, "kHz": TWO_PI * 1e3, "MHz": TWO_PI * 1e6, "GHz": TWO_PI * 1e9,
        "rad/s": 1.0, "krad/s": 1e3, "Mrad/s": 1e6, "Grad/s": 1e9,
    },
    "gyromagnetic": {
        "Hz/T": TWO_PI, "kHz/T": TWO_PI * 1e3, "MHz/T": TWO_PI * 1e6,
        "GHz/T": TWO_PI * 1e9, "rad/s/T": 1.0,
    },
    "temperature": {"K": 1.0, "mK": 1e-3, "uK": 1e-6},
    "pulse_area": {"T*s": 1.0, "Ts": 1.0, "T.s": 1.0, "nT*s": 1e-9, "uT*s": 1e-6,
                   "mT*s": 1e-3, "pT*s": 1e-12, "fT*s": 1e-15},
    "psd": {"T^2/Hz": 1.0, "T2/Hz": 1.0},
}


def parse_quantity(raw, kind: str, path: str) -> float:
    """Parse a `"<number> <unit>"` string into internal units."""
    if not isinstance(raw, str):
        raise ConfigError(
            f"{path}: dimensioned quantities must be strings with unit tags, got {raw!r}")
    parts = raw.strip().split()
    if len(parts) != 2:
        raise ConfigError(f"{path}: expected '<number> <unit>', got {raw!r}")
    number, unit = parts
    table = _UNIT_FACTORS[kind]
    if unit not in table:
        raise ConfigError(
            f"{path}: unknown {kind} unit {unit!r} (allowed: {sorted(table)})")
    try:
        value = float(number)
    except ValueError:
        raise ConfigError(f"{path}: {number!r} is not a number")
    return value * table[unit]


def _number(raw, path: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {raw!r}")
    return float(raw)


def _integer(raw, path: str) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ConfigError(f"{path}: expected an integer, got {raw!r}")
    return raw


def _string(raw, path: str, allowed=None) -> str:
    if not isinstance(raw, str):
        raise ConfigError(f"{path}: expected a string, got {raw!r}")
    if allowed is not None and raw not in allowed:
        raise ConfigError(f"{path}: {raw!r} not in {sorted(allowed)}")
    return raw


def _check_keys(table: dict, allowed, path: str) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key at {path}.{key}" if path else
                              f"unknown key at {key}")


def _squeeze(table, path: str) -> SqueezeParams:
    _check_keys(table, {"r", "theta"}, path)
    return SqueezeParams(r=_number(table.get("r", 0.0), f"{path}.r"),
                         theta=_number(table.get("theta", 0.0), f"{path}.theta"))


_SYSTEM_KEYS = {"omega_a", "omega_m", "kappa_a", "kappa_m", "g_am", "gamma_gyro",
                "temperature", "epsilon_b", "n_spheres", "spin_s", "n_spins",
                "bath_squeeze", "pre_squeeze"}


def build_system(table: dict, path: str = "system") -> SystemParams:
    if not isinstance(table, dict):
        raise ConfigError(f"{path}: expected a table")
    _check_keys(table, _SYSTEM_KEYS, path)
    for required in ("omega_a", "kappa_a", "kappa_m", "g_am", "gamma_gyro",
                     "temperature"):
        if required not in table:
            raise ConfigError(f"{path}.{required} is required")
    omega_a = parse_quantity(table["omega_a"], "frequency", f"{path}.omega_a")
    omega_m = None
    if "omega_m" in table:
        omega_m = parse_quantity(table["omega_m"], "frequency", f"{path}.omega_m")
    gamma = parse_quantity(table["gamma_gyro"], "gyromagnetic", f"{path}.gamma_gyro")
    eps_raw = table.get("epsilon_b", "auto")
    if eps_raw == "auto":
        spin_s = _number(table.get("spin_s", 2.5), f"{path}.spin_s")
        n_spins = _number(table.get("n_spins", 3.5e9), f"{path}.n_spins")
        epsilon_b = epsilon_b_default(gamma, spin_s, n_spins)
    else:
        epsilon_b = parse_quantity(eps_raw, "gyromagnetic", f"{path}.epsilon_b")
    return SystemParams(
        omega_a=omega_a,
        omega_m=omega_m,
        kappa_a=parse_quantity(table["kappa_a"], "frequency", f"{path}.kappa_a"),
        kappa_m=parse_quantity(table["kappa_m"], "frequency", f"{path}.kappa_m"),
        g_am=parse_quantity(table["g_am"], "frequency", f"{path}.g_am"),
        gamma_gyro=gamma,
        epsilon_b=epsilon_b,
        temperature=parse_quantity(table["temperature"], "temperature",
                                   f"{path}.temperature"),
        n_spheres=_integer(table.get("n_spheres", 1), f"{path}.n_spheres"),
        bath_squeeze=_squeeze(table.get("bath_squeeze", {}), f"{path}.bath_squeeze"),
        pre_squeeze=_squeeze(table.get("pre_squeeze", {}), f"{path}.pre_squeeze"),
    )


def _pulse(table, params: SystemParams, path: str) -> FieldPulse:
    if not isinstance(table, dict):
        raise ConfigError(f"{path}: expected a table")
    _check_keys(table, {"b0_x", "b0_y", "b0_z", "gamma_b0_z"}, path)
    if "b0_z" in table and "gamma_b0_z" in table:
        raise ConfigError(f"{path}: give either b0_z or gamma_b0_z, not both")
    b0_z = 0.0
    if "b0_z" in table:
        b0_z = parse_quantity(table["b0_z"], "pulse_area", f"{path}.b0_z")
    elif "gamma_b0_z" in table:
        b0_z = _number(table["gamma_b0_z"], f"{path}.gamma_b0_z") / params.gamma_gyro
    def area(key):
        if key not in table:
            return 0.0
        return parse_quantity(table[key], "pulse_area", f"{path}.{key}")
    return FieldPulse(b0_x=area("b0_x"), b0_y=area("b0_y"), b0_z=b0_z)


@dataclass(frozen=True)
class GridSpec:
    omega_min_over_kappa_m: float = -5.0
    omega_max_over_kappa_m: float = 5.0
    points: int = 1001

    def omegas(self, params: SystemParams):
        import numpy as np
        if self.points < 2:
            raise ConfigError("grid.points must be >= 2")
        if not self.omega_min_over_kappa_m < self.omega_max_over_kappa_m:
            raise ConfigError("grid bounds must satisfy min < max")
        return np.linspace(self.omega_min_over_kappa_m * params.kappa_m,
                           self.omega_max_over_kappa_m * params.kappa_m,
                           self.points)


def _grid(table, path: str) -> GridSpec:
    if not isinstance(table, dict):
        raise ConfigError(f"{path}: expected a table")
    _check_keys(table, {"omega_min_over_kappa_m", "omega_max_over_kappa_m", "points"},
                path)
    return GridSpec(
        omega_min_over_kappa_m=_number(table.get("omega_min_over_kappa_m", -5.0),
                                       f"{path}.omega_min_over_kappa_m"),
        omega_max_over_kappa_m=_number(table.get("omega_max_over_kappa_m", 5.0),
                                       f"{path}.omega_max_over_kappa_m"),
        points=_integer(table.get("points", 1001), f"{path}.points"),
    )


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated in-memory form of a scenario file."""

    task: str
    system: SystemParams
    grid: GridSpec
    seed: int
    output_path: str | None
    output_format: str
    blocks: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, default=str)
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


_TOP_KEYS = {"task", "seed", "system", "grid", "output", "transient", "stationary",
             "snr", "nsphere", "reconstruct", "sweep"}

_SWEEP_FIELDS = {
    # field name -> quantity kind (None = dimensionless number)
    "omega_a": "frequency", "omega_m": "frequency", "kappa_a": "frequency",
    "kappa_m": "frequency", "g_am": "frequency", "epsilon_b": "gyromagnetic",
    "temperature": "temperature", "n_spheres": None,
    "bath_squeeze.r": None, "bath_squeeze.theta": None,
    "pre_squeeze.r": None, "pre_squeeze.theta": None,
    "kappa_m_t_m": None,
}


def _transient_block(table, path):
    _check_keys(table, {"kappa_m_t_m", "gamma_b0_z", "channel", "units"}, path)
    return {
        "kappa_m_t_m": _number(table.get("kappa_m_t_m", 3.0), f"{path}.kappa_m_t_m"),
        "gamma_b0_z": _number(table.get("gamma_b0_z", 0.0), f"{path}.gamma_b0_z"),
        "channel": _string(table.get("channel", "x"), f"{path}.channel", {"x", "y"}),
        "units": _string(table.get("units", "tesla2_per_hertz"), f"{path}.units",
                         {"tesla2_per_hertz", "epsilonb_normalized"}),
    }


def _stationary_block(table, path):
    _check_keys(table, {"channel", "signal_psd", "units"}, path)
    block = {
        "channel": _string(table.get("channel", "x"), f"{path}.channel", {"x", "y"}),
        "units": _string(table.get("units", "tesla2_per_hertz"), f"{path}.units",
                         {"tesla2_per_hertz", "epsilonb_normalized"}),
        "signal_psd": 0.0,
    }
    if "signal_psd" in table:
        block["signal_psd"] = parse_quantity(table["signal_psd"], "psd",
                                             f"{path}.signal_psd")
    return block


def _snr_block(table, params, path):
    _check_keys(table, {"mode", "channel", "kappa_m_t_m", "pulse", "signal_psd"}, path)
    mode = _string(table.get("mode", "transient"), f"{path}.mode",
                   {"transient", "stationary"})
    block = {
        "mode": mode,
        "channel": _string(table.get("channel", "x"), f"{path}.channel", {"x", "y"}),
    }
    if mode == "transient":
        block["kappa_m_t_m"] = _number(table.get("kappa_m_t_m", 3.0),
                                       f"{path}.kappa_m_t_m")
        block["pulse"] = _pulse(table.get("pulse", {}), params, f"{path}.pulse")
    else:
        if "signal_psd" not in table:
            raise ConfigError(f"{path}.signal_psd is required in stationary mode")
        block["signal_psd"] = parse_quantity(table["signal_psd"], "psd",
                                             f"{path}.signal_psd")
    return block


def _reconstruct_block(table, params, path):
    _check_keys(table, {"kappa_m_t_m", "bias", "ref_x", "ref_y", "pulse",
                        "noise", "n_traj", "band_half_width_over_kappa_m"}, path)
    if "pulse" not in table:
        raise ConfigError(f"{path}.pulse is required")
    if "bias" not in table:
        raise ConfigError(f"{path}.bias is required")
    noise = _string(table.get("noise", "none"), f"{path}.noise",
                    {"none", "monte-carlo"})
    return {
        "kappa_m_t_m": _number(table.get("kappa_m_t_m", 3.0), f"{path}.kappa_m_t_m"),
        "bias": parse_quantity(table["bias"], "pulse_area", f"{path}.bias"),
        "ref_x": parse_quantity(table.get("ref_x", "5.684e-12 T*s"), "pulse_area",
                                f"{path}.ref_x"),
        "ref_y": parse_quantity(table.get("ref_y", "5.684e-12 T*s"), "pulse_area",
                                f"{path}.ref_y"),
        "pulse": _pulse(table["pulse"], params, f"{path}.pulse"),
        "noise": noise,
        "n_traj": _integer(table.get("n_traj", 10_000), f"{path}.n_traj"),
        "band_half_width_over_kappa_m": _number(
            table.get("band_half_width_over_kappa_m", 0.5),
            f"{path}.band_half_width_over_kappa_m"),
    }


def _sweep_block(table, params, path):
    _check_keys(table, {"observable", "omega_over_kappa_m", "axes", "signal_psd",
                        "kappa_m_t_m", "channel", "pulse"}, path)
    observable = _string(table.get("observable", "stationary-psd"), f"{path}.observable",
                         {"stationary-psd", "nsphere-psd", "stationary-snr",
                          "transient-snr", "noise-ratio"})
    axes_raw = table.get("axes", [])
    if not isinstance(axes_raw, list) or not axes_raw:
        raise ConfigError(f"{path}.axes must be a non-empty list of axis tables")
    if len(axes_raw) > 2:
        raise ConfigError(f"{path}.axes supports at most 2 axes, got {len(axes_raw)}")
    axes = []
    for i, axis in enumerate(axes_raw):
        apath = f"{path}.axes[{i}]"
        if not isinstance(axis, dict):
            raise ConfigError(f"{apath}: expected a table")
        _check_keys(axis, {"field", "values"}, apath)
        name = _string(axis.get("field", ""), f"{apath}.field", set(_SWEEP_FIELDS))
        kind = _SWEEP_FIELDS[name]
        values_raw = axis.get("values")
        if not isinstance(values_raw, list) or not values_raw:
            raise ConfigError(f"{apath}.values must be a non-empty list")
        values = []
        for j, v in enumerate(values_raw):
            if kind is None:
                if name == "n_spheres":
                    values.append(_integer(v, f"{apath}.values[{j}]"))
                else:
                    values.append(_number(v, f"{apath}.values[{j}]"))
            else:
                values.append(parse_quantity(v, kind, f"{apath}.values[{j}]"))
        axes.append({"field": name, "values": values})
    block = {
        "observable": observable,
        "omega_over_kappa_m": _number(table.get("omega_over_kappa_m", 0.0),
                                      f"{path}.omega_over_kappa_m"),
        "axes": axes,
        "signal_psd": 0.0,
        "kappa_m_t_m": _number(table.get("kappa_m_t_m", 3.0), f"{path}.kappa_m_t_m"),
        "channel": _string(table.get("channel", "x"), f"{path}.channel", {"x", "y"}),
        "pulse": _pulse(table.get("pulse", {}), params, f"{path}.pulse"),
    }
    if "signal_psd" in table:
        block["signal_psd"] = parse_quantity(table["signal_psd"], "psd",
                                             f"{path}.signal_psd")
    return block


_BLOCK_BUILDERS = {
    "transient-spectrum": ("transient", lambda t, p: _transient_block(t, "transient")),
    "steady-spectrum": ("stationary", lambda t, p: _stationary_block(t, "stationary")),
    "noise-ratio": ("stationary", lambda t, p: _stationary_block(t, "stationary")),
    "nsphere": ("stationary", lambda t, p: _stationary_block(t, "stationary")),
    "snr": ("snr", lambda t, p: _snr_block(t, p, "snr")),
    "reconstruct": ("reconstruct", lambda t, p: _reconstruct_block(t, p, "reconstruct")),
    "sweep": ("sweep", lambda t, p: _sweep_block(t, p, "sweep")),
}


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML parse error: {exc}")
    return validate_config(raw)


def validate_config(raw: dict) -> ScenarioConfig:
    _check_keys(raw, _TOP_KEYS, "")
    if "task" not in raw:
        raise ConfigError("task is required")
    task = _string(raw["task"], "task", set(TASKS) - {"figure-data"})
    if "system" not in raw:
        raise ConfigError("system table is required")
    system = build_system(raw["system"])
    grid = _grid(raw.get("grid", {}), "grid")
    seed = _integer(raw.get("seed", 0), "seed")

    output = raw.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("output: expected a table")
    _check_keys(output, {"path", "format"}, "output")
    output_path = output.get("path")
    if output_path is not None:
        output_path = _string(output_path, "output.path")
    output_format = _string(output.get("format", "csv"), "output.format",
                            {"csv", "json"})

    blocks = {}
    if task in _BLOCK_BUILDERS:
        key, builder = _BLOCK_BUILDERS[task]
        table = raw.get(key, {})
        if not isinstance(table, dict):
            raise ConfigError(f"{key}: expected a table")
        if task in ("reconstruct", "sweep") and key not in raw:
            raise ConfigError(f"{key} table is required for task {task!r}")
        blocks[key] = builder(table, system)
    return ScenarioConfig(task=task, system=system, grid=grid, seed=seed,
                          output_path=output_path, output_format=output_format,
                          blocks=blocks, raw=raw)
