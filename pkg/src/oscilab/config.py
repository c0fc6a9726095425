"""Strict JSON experiment configuration: schema, named resolvers.

A config document is one JSON object.  Unknown keys anywhere are
rejected by name, misspelled builtin kinds are rejected by key, and a
fixed seed makes every artifact byte-identical across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .amplitudes import (
    MultilinearAmplitude,
    bracket_power_amplitude,
    constant_amplitude,
)
from .grid import (
    Field,
    Grid,
    band_limited_field,
    constant_field,
    field_from_function,
    field_from_spectrum,
    make_grid,
    philox_rng,
    random_field,
    sobolev_profile_field,
)
from .phases import Phase, builtin_phase
from .sharpness import build_sharpness_amplitude

COMMANDS = ("verify", "norms", "decompose", "evolve", "sharpness", "carleson")

_TOP_KEYS = {"command", "seed", "out", "grid", "phases", "amplitudes",
             "fields", "params", "tolerances"}
_GRID_KEYS = {"n", "G", "L"}

_PARAM_KEYS = {
    "verify": {"checks"},
    "norms": {"field", "norms"},
    "decompose": {"amplitude", "N", "samples"},
    "evolve": {"phases", "zeta", "fields", "kappas", "exponents", "horizon",
               "time_steps", "q", "quadrature", "dump_fields", "residual"},
    "sharpness": {"p", "q", "r", "eps", "s", "bandwidths", "identity_check",
                  "identity_grid_points"},
    "carleson": {"s", "base_levels", "draws", "level_count"},
}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def _require_keys(section: dict, allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


@dataclass
class ExperimentConfig:
    command: str
    seed: int
    grid: Grid
    phases: dict = field(default_factory=dict)
    amplitudes: dict = field(default_factory=dict)
    fields: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def phase(self, name: str) -> Phase:
        if name not in self.phases:
            raise ConfigError(f"unresolved phase name {name!r}")
        return self.phases[name]

    def amplitude(self, name: str) -> MultilinearAmplitude:
        if name not in self.amplitudes:
            raise ConfigError(f"unresolved amplitude name {name!r}")
        return self.amplitudes[name]

    def field_by_name(self, name: str) -> Field:
        if name not in self.fields:
            raise ConfigError(f"unresolved field name {name!r}")
        return self.fields[name]


def _build_phase(name: str, spec: dict) -> Phase:
    _require_keys(spec, {"kind", "s"}, f"phases.{name}")
    kind = spec.get("kind")
    if kind is None:
        raise ConfigError(f"phases.{name} is missing 'kind'")
    try:
        return builtin_phase(kind, s=spec.get("s"))
    except ValueError as exc:
        raise ConfigError(f"phases.{name}: {exc}") from exc


def _expression_amplitude(expr: str, N: int, n: int, m: float) -> MultilinearAmplitude:
    """Amplitude from a numpy expression in bracket, xi1..xiN (slot norms)."""
    def fn(x, Xi):
        Xi = np.asarray(Xi, dtype=float)
        env = {"np": np,
               "bracket": np.sqrt(1.0 + np.sum(Xi**2, axis=(-2, -1)))}
        for j in range(N):
            env[f"xi{j + 1}"] = np.sqrt(np.sum(Xi[..., j, :] ** 2, axis=-1))
        return eval(expr, {"__builtins__": {}}, env)  # noqa: S307 - desk tool

    return MultilinearAmplitude(arity=N, dim=n, order=float(m), fn=fn,
                                label=f"expr({expr})")


def _build_amplitude(name: str, spec: dict, grid: Grid) -> MultilinearAmplitude:
    kind = spec.get("kind")
    if kind == "constant":
        _require_keys(spec, {"kind", "N", "value"}, f"amplitudes.{name}")
        return constant_amplitude(int(spec.get("N", 2)), grid.dim,
                                  float(spec.get("value", 1.0)))
    if kind == "japanese_bracket_power":
        _require_keys(spec, {"kind", "N", "m"}, f"amplitudes.{name}")
        return bracket_power_amplitude(float(spec["m"]), int(spec.get("N", 2)), grid.dim)
    if kind == "sharpness_bilinear":
        _require_keys(spec, {"kind", "m1", "m2", "s"}, f"amplitudes.{name}")
        return build_sharpness_amplitude(float(spec["m1"]), float(spec["m2"]),
                                         n=grid.dim)
    if kind == "custom_expression":
        _require_keys(spec, {"kind", "expr", "N", "m"}, f"amplitudes.{name}")
        return _expression_amplitude(spec["expr"], int(spec.get("N", 2)),
                                     grid.dim, float(spec.get("m", 0.0)))
    raise ConfigError(f"amplitudes.{name}: unknown kind {kind!r}")


def _build_field(name: str, spec: dict, grid: Grid, seed: int) -> Field:
    kind = spec.get("kind")
    rng = philox_rng((seed ^ 0x5EED) + sum(ord(c) for c in name))
    if kind == "constant":
        _require_keys(spec, {"kind", "value"}, f"fields.{name}")
        return constant_field(grid, complex(spec.get("value", 1.0)))
    if kind == "random":
        _require_keys(spec, {"kind"}, f"fields.{name}")
        return random_field(grid, rng)
    if kind == "random_band_limited":
        _require_keys(spec, {"kind", "bandwidth"}, f"fields.{name}")
        return band_limited_field(grid, float(spec["bandwidth"]), rng)
    if kind == "sobolev_profile":
        _require_keys(spec, {"kind", "bandwidth", "kappa"}, f"fields.{name}")
        return sobolev_profile_field(grid, float(spec["bandwidth"]),
                                     float(spec.get("kappa", 0.0)), rng)
    if kind == "single_mode":
        _require_keys(spec, {"kind", "k"}, f"fields.{name}")
        k = np.asarray(spec["k"], dtype=float)

        def delta(xi):
            target = k * grid.freq_step
            return np.where(
                np.all(np.abs(xi - target) < 1e-9, axis=-1), 1.0, 0.0)

        return field_from_spectrum(grid, delta)
    if kind == "gaussian":
        _require_keys(spec, {"kind", "width"}, f"fields.{name}")
        w = float(spec.get("width", 1.0))
        return field_from_function(
            grid, lambda x: np.exp(-np.sum(x**2, axis=-1) / (2.0 * w**2)))
    if kind == "miyachi":
        _require_keys(spec, {"kind", "lam", "s", "chirp"}, f"fields.{name}")
        from .sharpness import build_miyachi_function
        return build_miyachi_function(float(spec["lam"]), float(spec["s"]),
                                      bool(spec.get("chirp", False)), grid)
    raise ConfigError(f"fields.{name}: unknown kind {kind!r}")


def load_config(path, command: str | None = None) -> ExperimentConfig:
    """Parse and validate a config file; resolve all named objects."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(doc, command=command)


def parse_config(doc: dict, command: str | None = None) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    _require_keys(doc, _TOP_KEYS, "the top level")
    cmd = doc.get("command", command)
    if cmd is None:
        raise ConfigError("no command given (config key 'command' or CLI argument)")
    if command is not None and doc.get("command") not in (None, command):
        raise ConfigError(
            f"config command {doc['command']!r} conflicts with CLI command {command!r}")
    if cmd not in COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}; expected one of {COMMANDS}")
    grid_spec = doc.get("grid", {"n": 1, "G": 64, "L": np.pi})
    _require_keys(grid_spec, _GRID_KEYS, "grid")
    grid = make_grid(int(grid_spec.get("n", 1)), int(grid_spec.get("G", 64)),
                     float(grid_spec.get("L", np.pi)))
    seed = int(doc.get("seed", 0))
    params = doc.get("params", {})
    _require_keys(params, _PARAM_KEYS[cmd], f"params for command {cmd!r}")
    cfg = ExperimentConfig(command=cmd, seed=seed, grid=grid,
                           params=params, tolerances=doc.get("tolerances", {}),
                           raw=doc)
    for name, spec in doc.get("phases", {}).items():
        cfg.phases[name] = _build_phase(name, spec)
    for name, spec in doc.get("amplitudes", {}).items():
        cfg.amplitudes[name] = _build_amplitude(name, spec, grid)
    for name, spec in doc.get("fields", {}).items():
        cfg.fields[name] = _build_field(name, spec, grid, seed)
    return cfg
