"""Run configuration: defaults, strict ingestion, canonical hashing.

Config files are JSON objects. All frequencies and rates are linear Hz,
passives SI, times seconds; conversion to angular units happens here,
once, when building engine parameter records. Unknown keys are rejected
with the full path so unit typos cannot pass silently.
"""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

from .detector import DetectorParams
from .device import CbjjParams, CouplerParams, FjsParams, TlrParams, to_angular

__all__ = [
    "ConfigError",
    "DEFAULT_CONFIG",
    "load_config",
    "canonical_json",
    "config_hash",
    "tlr_params",
    "cbjj_params",
    "coupler_params",
    "fjs_params",
    "detector_params",
]


class ConfigError(ValueError):
    """Configuration rejected; ``path`` names the offending key."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# log-spaced figure grids at coarse resolution, frozen explicitly so the
# config hash does not depend on grid-generation code
_KAPPA_GRID_HZ = [1.0e3, 3.1622776601683795e3, 1.0e4, 3.1622776601683795e4, 1.0e5]
_GAMMA2_GRID_HZ = [1.0e5, 3.1622776601683795e5, 1.0e6, 3.1622776601683795e6, 1.0e7]

DEFAULT_CONFIG = {
    "device": {
        "tlr": {
            "inductance_h": 0.5e-9,
            "capacitance_f": 5.0e-12,
            "length_m": 4.0e-3,
            "mode_index": 2,
            "photon_loss_rate_hz": 1.0e4,
        },
        "cbjj": {
            "junction_capacitance_f": 0.5e-12,
            "level_splitting_hz": 2.2e10,
            "decay_rate_hz": 1.0e5,
            "dephasing_rate_hz": 1.0e6,
        },
        "coupler": {
            "coupling_capacitance_f": 2.3e-14,
            "right_coupling_capacitance_f": 2.3e-14,
        },
        "fjs": {
            "junction_critical_current_a": 5.0e-5,
            "junction_capacitance_f": 1.0e-12,
            "shunt_capacitance_f": 1.9e-11,
            "squid_self_inductance_h": 1.0e-11,
            "loop_inductance_h": 1.0e-10,
            "mutual_inductance_c_h": 8.0e-11,
            "mutual_inductance_d_h": None,
            "bias_current_a": 0.0,
            "phi_sq_spread_scale": 1.0,
        },
        "detector": {
            "coupling_hz": 1.0e8,
            "detuning_hz": 0.0,
            "photon_loss_rate_hz": 1.0e4,
            "escape_rate_hz": 2.0e7,
            "intra_well_decay_hz": 1.0e5,
            "dephasing_rate_hz": 1.0e6,
        },
        "temperature_k": 0.04,
    },
    "noise": {
        "gamma2_hz": 1.0e6,
        "kappa_hz": 1.0e4,
        "samples": 1000,
        "seed": 42,
    },
    "integrator": {
        "method": "expm",
        "initial_steps": None,
        "trace_tol": 1.0e-9,
        "max_halvings": 20,
    },
    "experiments": {
        "transfer": {
            "detuning_hz": 2.0e9,
            "kappa_grid_hz": _KAPPA_GRID_HZ,
            "gamma2_grid_hz": _GAMMA2_GRID_HZ,
        },
        "cphase": {
            "speed_ratios": [5.0, 10.0, 20.0, 40.0, 80.0],
            "kappa_hz": 0.0,
            "flips": "ideal",
        },
        "detector": {
            "gamma_over_kappa": [10.0, 100.0, 1000.0, 2000.0, 10000.0],
        },
    },
    "validation": {
        "trace_tol": 1.0e-9,
        "hermiticity_tol": 1.0e-9,
        "pre_hermitize_tol": 1.0e-7,
        "positivity_tol": 1.0e-8,
        "cross_integrator_tol": 1.0e-6,
        "excitation_tol": 1.0e-9,
        "rabi_return_tol": 1.0e-9,
        "echo_tol": 1.0e-9,
        "mc_sigma": 3.0,
        "mc_samples": 1000,
        "halving_ratio_band": [1.5, 3.0],
    },
}

_ENUMS = {
    "integrator.method": ("expm", "rk4"),
    "experiments.cphase.flips": ("ideal", "simulated"),
}

# leaves where None is a meaningful value (auto-derived / engine default)
_NULLABLE = {"device.fjs.mutual_inductance_d_h", "integrator.initial_steps"}


def _check_leaf(path: str, default, value):
    if path in _ENUMS:
        if value not in _ENUMS[path]:
            raise ConfigError(path, f"must be one of {_ENUMS[path]}, got {value!r}")
        return value
    if value is None:
        if path in _NULLABLE:
            return None
        raise ConfigError(path, "null is not allowed here")
    if isinstance(default, bool) or isinstance(value, bool):
        raise ConfigError(path, "boolean values are not used in this schema")
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(path, f"expected string, got {type(value).__name__}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list) or not value:
            raise ConfigError(path, "expected a nonempty list of numbers")
        out = []
        for i, item in enumerate(value):
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise ConfigError(f"{path}[{i}]", "expected a number")
            out.append(float(item))
        return out
    if default is None or isinstance(default, (int, float)):
        if not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {type(value).__name__}")
        if isinstance(default, int) and not isinstance(default, bool):
            if float(value) != int(value):
                raise ConfigError(path, "expected an integer")
            return int(value)
        return float(value)
    raise ConfigError(path, "unsupported schema leaf")


def _merge(defaults: dict, overrides: dict, prefix: str = "") -> dict:
    merged = {}
    for key, default in defaults.items():
        path = f"{prefix}{key}"
        if key not in overrides:
            merged[key] = copy.deepcopy(default)
            continue
        value = overrides[key]
        if isinstance(default, dict):
            if not isinstance(value, dict):
                raise ConfigError(path, "expected an object")
            merged[key] = _merge(default, value, prefix=f"{path}.")
        else:
            merged[key] = _check_leaf(path, default, value)
    for key in overrides:
        if key not in defaults:
            raise ConfigError(f"{prefix}{key}", "unknown key")
    return merged


def load_config(source: str | Path | dict | None = None) -> dict:
    """Full effective configuration: documented defaults plus overrides.

    ``source`` may be a JSON file path, an already-parsed mapping, or
    ``None`` for pure defaults. Unknown keys, wrong types and malformed
    JSON raise :class:`ConfigError`.
    """
    if source is None:
        overrides = {}
    elif isinstance(source, dict):
        overrides = source
    else:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ConfigError(str(source), f"cannot read config file: {exc}") from exc
        try:
            overrides = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(str(source), f"invalid JSON: {exc}") from exc
        if not isinstance(overrides, dict):
            raise ConfigError(str(source), "top level must be a JSON object")
    return _merge(DEFAULT_CONFIG, overrides)


def canonical_json(config: dict) -> str:
    """Key-sorted, whitespace-free serialization used for hashing and CSV."""
    return json.dumps(config, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


# ------------------------------------------------ engine parameter bridges


def tlr_params(config: dict, kappa_hz: float | None = None) -> TlrParams:
    sec = config["device"]["tlr"]
    loss = sec["photon_loss_rate_hz"] if kappa_hz is None else kappa_hz
    return TlrParams(
        inductance=sec["inductance_h"],
        capacitance=sec["capacitance_f"],
        length=sec["length_m"],
        mode_index=sec["mode_index"],
        photon_loss_rate=to_angular(loss),
    )


def cbjj_params(config: dict) -> CbjjParams:
    sec = config["device"]["cbjj"]
    return CbjjParams(
        junction_capacitance=sec["junction_capacitance_f"],
        level_splitting=to_angular(sec["level_splitting_hz"]),
        decay_rate=to_angular(sec["decay_rate_hz"]),
        dephasing_rate=to_angular(sec["dephasing_rate_hz"]),
    )


def coupler_params(config: dict) -> CouplerParams:
    sec = config["device"]["coupler"]
    return CouplerParams(
        coupling_capacitance=sec["coupling_capacitance_f"],
        right_coupling_capacitance=sec["right_coupling_capacitance_f"],
    )


def fjs_params(config: dict) -> FjsParams:
    sec = config["device"]["fjs"]
    return FjsParams(
        junction_critical_current=sec["junction_critical_current_a"],
        junction_capacitance=sec["junction_capacitance_f"],
        shunt_capacitance=sec["shunt_capacitance_f"],
        squid_self_inductance=sec["squid_self_inductance_h"],
        loop_inductance=sec["loop_inductance_h"],
        mutual_inductance_c=sec["mutual_inductance_c_h"],
        mutual_inductance_d=sec["mutual_inductance_d_h"],
        bias_current=sec["bias_current_a"],
        phi_sq_spread_scale=sec["phi_sq_spread_scale"],
    )


def detector_params(config: dict) -> DetectorParams:
    sec = config["device"]["detector"]
    return DetectorParams(
        coupling=to_angular(sec["coupling_hz"]),
        detuning=to_angular(sec["detuning_hz"]),
        photon_loss_rate=to_angular(sec["photon_loss_rate_hz"]),
        escape_rate=to_angular(sec["escape_rate_hz"]),
        intra_well_decay=to_angular(sec["intra_well_decay_hz"]),
        dephasing_rate=to_angular(sec["dephasing_rate_hz"]),
    )
