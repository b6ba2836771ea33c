"""Run configuration: strict JSON ingestion and serialization.

A configuration file mirrors the domain objects section by section, all
values in SI units.  Parsing is strict: unknown sections or keys are
rejected with a nearest-match suggestion, and every value is type-checked
before the domain constructors run their own physical validation.  Missing
keys fall back to the shipped reference device (data/defaults.json).
"""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from . import bias, circuit, lattice
from .errors import ConfigError, ParseError, SquidHorizonError, UnknownKey

__all__ = [
    "OutputConfig",
    "RunConfig",
    "apply_override",
    "config_to_dict",
    "default_config",
    "defaults_path",
    "dumps_config",
    "load_config",
    "loads_config",
    "resolve_path",
    "write_config",
]

_EMIT_FLAGS = ("csv", "svg", "bin")


@dataclass(frozen=True)
class OutputConfig:
    """Where results land and in which formats."""

    directory: Optional[str] = None
    emit: tuple = ("csv",)
    workers: int = 1

    def __post_init__(self) -> None:
        emit = tuple(dict.fromkeys(self.emit))
        for flag in emit:
            if flag not in _EMIT_FLAGS:
                raise ConfigError("unknown emit flag %r; valid flags: %s"
                                  % (flag, ", ".join(_EMIT_FLAGS)))
        object.__setattr__(self, "emit", emit)
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")


@dataclass(frozen=True)
class RunConfig:
    """Complete description of one run, built from validated domain objects."""

    squid: circuit.SquidParams
    array: circuit.ArrayParams
    pulse: bias.FluxPulse
    solver: lattice.SolverConfig
    output: OutputConfig
    max_signal_frequency: float

    @property
    def junction(self) -> circuit.JunctionParams:
        return self.squid.junction


class _Opt:
    def __init__(self, kind):
        self.kind = kind


# section -> key -> expected JSON type (None entries allowed via _Opt).
_SCHEMA = {
    "junction": {
        "critical_current": float,
        "capacitance": float,
        "normal_resistance": _Opt(float),
    },
    "squid": {"loop_inductance": float},
    "array": {
        "n_cells": int,
        "cell_length": float,
        "ground_capacitance": float,
        "environment_impedance": float,
    },
    "pulse": {
        "amplitude": float,
        "dc_offset": float,
        "velocity": float,
        "steepness": float,
        "front_position": float,
        "broadening": float,
        "shape": str,
    },
    "solver": {
        "n_steps": int,
        "dt": _Opt(float),
        "courant_fraction": float,
        "boundary": str,
        "record_every": int,
        "current_dependent_inductance": bool,
        "check_every": int,
    },
    "audit": {"max_signal_frequency": float},
    "output": {
        "directory": _Opt(str),
        "emit": list,
        "workers": int,
    },
}

# Reference device: 2 uA junctions tuned to a 1 THz zero-flux plasma
# frequency, 0.25 um cells, the 0.2 Phi_0 front at 95% of the cell speed
# with the gradient-capped steepness and the broadening rate calibrated
# for a 10% temperature drop per 1000 cells.
_DEFAULTS = {
    "junction": {
        "critical_current": 2.0e-06,
        "capacitance": 1.539339760883361e-16,
        "normal_resistance": None,
    },
    "squid": {"loop_inductance": 1.0e-11},
    "array": {
        "n_cells": 4800,
        "cell_length": 2.5e-07,
        "ground_capacitance": 5.0e-17,
        "environment_impedance": 50.0,
    },
    "pulse": {
        "amplitude": 0.2,
        "dc_offset": 0.0,
        "velocity": 3702889.2391083743,
        "steepness": 436228.3606298319,
        "front_position": 0.0,
        "broadening": 444.4444444444444,
        "shape": "tanh",
    },
    "solver": {
        "n_steps": 5000,
        "dt": None,
        "courant_fraction": 0.2,
        "boundary": "absorbing",
        "record_every": 500,
        "current_dependent_inductance": False,
        "check_every": 128,
    },
    "audit": {"max_signal_frequency": 5.0e10},
    "output": {"directory": None, "emit": ["csv"], "workers": 1},
}


def defaults_path() -> Path:
    """Path of the shipped reference configuration."""
    return Path(__file__).parent / "data" / "defaults.json"


def _suggest(name: str, candidates) -> str:
    close = difflib.get_close_matches(name, list(candidates), n=1)
    return "; did you mean %r?" % close[0] if close else ""


def _check_type(section: str, key: str, value: Any, kind) -> Any:
    if isinstance(kind, _Opt):
        if value is None:
            return None
        kind = kind.kind
    label = "%s.%s" % (section, key)
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError("key %r: expected a number, got %r"
                              % (label, value))
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError("key %r: expected an integer, got %r"
                              % (label, value))
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError("key %r: expected true/false, got %r"
                              % (label, value))
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError("key %r: expected a string, got %r"
                              % (label, value))
        return value
    if kind is list:
        if not isinstance(value, list) or \
                not all(isinstance(v, str) for v in value):
            raise ConfigError("key %r: expected a list of strings, got %r"
                              % (label, value))
        return list(value)
    raise AssertionError(kind)


def _merged(data: dict) -> dict:
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object, got %r" % data)
    merged = {}
    for section, raw in data.items():
        if section not in _SCHEMA:
            raise UnknownKey("unknown section %r%s"
                             % (section, _suggest(section, _SCHEMA)))
        if not isinstance(raw, dict):
            raise ConfigError("section %r must be a JSON object" % section)
        for key in raw:
            if key not in _SCHEMA[section]:
                raise UnknownKey(
                    "unknown key %r in section %r%s"
                    % (key, section, _suggest(key, _SCHEMA[section])))
    for section, keys in _SCHEMA.items():
        got = data.get(section, {})
        merged[section] = {
            key: _check_type(section, key, got.get(key, _DEFAULTS[section][key]),
                             kind)
            for key, kind in keys.items()
        }
    return merged


def _build(merged: dict) -> RunConfig:
    def section(name, builder, **kwargs):
        try:
            return builder(**kwargs)
        except (SquidHorizonError, ValueError) as exc:
            raise ConfigError("section %r: %s" % (name, exc)) from exc

    junction = section("junction", circuit.JunctionParams, **merged["junction"])
    squid = section("squid", circuit.SquidParams, junction=junction,
                    **merged["squid"])
    array = section("array", circuit.ArrayParams, **merged["array"])
    pulse = section("pulse", bias.FluxPulse, **merged["pulse"])
    solver = section("solver", lattice.SolverConfig, **merged["solver"])
    output = section("output", OutputConfig,
                     directory=merged["output"]["directory"],
                     emit=tuple(merged["output"]["emit"]),
                     workers=merged["output"]["workers"])
    freq = merged["audit"]["max_signal_frequency"]
    if freq <= 0.0:
        raise ConfigError("audit.max_signal_frequency must be positive")
    return RunConfig(squid=squid, array=array, pulse=pulse, solver=solver,
                     output=output, max_signal_frequency=freq)


def default_config() -> RunConfig:
    """The reference configuration, equal to parsing the shipped defaults."""
    return _build(_merged({}))


def loads_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse a configuration from a JSON string."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("%s: line %d column %d: %s"
                         % (source, exc.lineno, exc.colno, exc.msg)) from exc
    return _build(_merged(data))


def load_config(path) -> RunConfig:
    """Parse a configuration file; missing keys take the shipped defaults."""
    path = Path(path)
    return loads_config(path.read_text(), source=str(path))


def config_to_dict(cfg: RunConfig) -> dict:
    """Nested plain-dict form of the configuration, parseable back."""
    return {
        "junction": {
            "critical_current": cfg.junction.critical_current,
            "capacitance": cfg.junction.capacitance,
            "normal_resistance": cfg.junction.normal_resistance,
        },
        "squid": {"loop_inductance": cfg.squid.loop_inductance},
        "array": {
            "n_cells": cfg.array.n_cells,
            "cell_length": cfg.array.cell_length,
            "ground_capacitance": cfg.array.ground_capacitance,
            "environment_impedance": cfg.array.environment_impedance,
        },
        "pulse": {
            "amplitude": cfg.pulse.amplitude,
            "dc_offset": cfg.pulse.dc_offset,
            "velocity": cfg.pulse.velocity,
            "steepness": cfg.pulse.steepness,
            "front_position": cfg.pulse.front_position,
            "broadening": cfg.pulse.broadening,
            "shape": cfg.pulse.shape,
        },
        "solver": {
            "n_steps": cfg.solver.n_steps,
            "dt": cfg.solver.dt,
            "courant_fraction": cfg.solver.courant_fraction,
            "boundary": cfg.solver.boundary,
            "record_every": cfg.solver.record_every,
            "current_dependent_inductance":
                cfg.solver.current_dependent_inductance,
            "check_every": cfg.solver.check_every,
        },
        "audit": {"max_signal_frequency": cfg.max_signal_frequency},
        "output": {
            "directory": cfg.output.directory,
            "emit": list(cfg.output.emit),
            "workers": cfg.output.workers,
        },
    }


def dumps_config(cfg: RunConfig) -> str:
    """Deterministic JSON text for the configuration."""
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"


def write_config(path, cfg: RunConfig) -> None:
    Path(path).write_text(dumps_config(cfg))


def resolve_path(path: str) -> tuple:
    """Split a dotted parameter path, checking it against the schema."""
    parts = path.split(".")
    if len(parts) != 2:
        raise ConfigError("parameter path %r must look like 'section.key'"
                          % path)
    section, key = parts
    if section not in _SCHEMA:
        raise ConfigError("parameter path %r: unknown section%s"
                          % (path, _suggest(section, _SCHEMA)))
    if key not in _SCHEMA[section]:
        raise ConfigError("parameter path %r: unknown key%s"
                          % (path, _suggest(key, _SCHEMA[section])))
    return section, key


def apply_override(cfg: RunConfig, path: str, value) -> RunConfig:
    """New configuration with one dotted parameter replaced."""
    section, key = resolve_path(path)
    data = config_to_dict(cfg)
    data[section][key] = value
    return _build(_merged(data))
