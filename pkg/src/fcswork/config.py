"""Run configuration: parsing, validation and model construction.

Configs are TOML (or JSON) with blocks ``system``, ``bath``, ``counting``,
``run``, ``output`` and, for the corresponding subcommands, ``sweep`` and
``g2``.  Energies are in units of ``system.nu`` unless ``system.units`` is
``"absolute"``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from fcswork import model as models
from fcswork.errors import ConfigError

SYSTEM_TYPES = (
    "driven_qubit",
    "pulsed_qubit",
    "rwa_qubit",
    "harmonic_oscillator",
    "coupled_qubits",
    "three_level",
    "undriven_qubit",
)


@dataclass
class RunConfig:
    system: dict
    bath: dict = field(default_factory=dict)
    counting: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    g2: dict = field(default_factory=dict)

    @property
    def nu(self):
        return self.system.get("nu", 1.0)

    @property
    def grid_size(self):
        return self.counting.get("grid_size", 64)

    @property
    def spacing(self):
        return self.counting.get("spacing")

    @property
    def t_final(self):
        if "t_final" in self.run:
            return float(self.run["t_final"])
        return float(self.run.get("periods", 5)) * 2 * math.pi / self.nu

    @property
    def dt(self):
        return self.run.get("dt")


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".json":
            raw = json.loads(text)
        else:
            raw = tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError("config", f"cannot parse {path.name}: {exc}") from exc
    return parse_config(raw)


def _number(block, name, key, positive=False, nonneg=False, required=True, default=None):
    if key not in block:
        if required:
            raise ConfigError(f"{name}.{key}", "missing")
        return default
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}.{key}", f"expected a number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{name}.{key}", "must be positive")
    if nonneg and value < 0:
        raise ConfigError(f"{name}.{key}", "must be non-negative")
    return float(value)


def parse_config(raw):
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a table")
    known = {"system", "bath", "counting", "run", "output", "sweep", "g2"}
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown block")
        if not isinstance(raw[key], dict):
            raise ConfigError(key, "must be a table")
    if "system" not in raw:
        raise ConfigError("system", "missing")
    cfg = RunConfig(**{k: dict(v) for k, v in raw.items()})
    kind = cfg.system.get("type")
    if kind not in SYSTEM_TYPES:
        raise ConfigError("system.type", f"expected one of {', '.join(SYSTEM_TYPES)}, got {kind!r}")
    _number(cfg.system, "system", "nu", positive=True, required=False)
    units = cfg.system.get("units", "nu")
    if units not in ("nu", "absolute"):
        raise ConfigError("system.units", "must be 'nu' or 'absolute'")
    n = cfg.counting.get("grid_size", 64)
    if not isinstance(n, int) or isinstance(n, bool) or n < 2 or n & (n - 1):
        raise ConfigError("counting.grid_size", "must be a power of two >= 2")
    _number(cfg.counting, "counting", "spacing", positive=True, required=False)
    _number(cfg.run, "run", "t_final", nonneg=True, required=False)
    _number(cfg.run, "run", "periods", nonneg=True, required=False)
    _number(cfg.run, "run", "dt", positive=True, required=False)
    # building the model validates the physical parameters
    model = build_model(cfg)
    if cfg.spacing is not None:
        for ch in model.channels:
            ratio = ch.transition_energy / cfg.spacing
            if abs(ratio - round(ratio)) > 1e-9:
                raise ConfigError("counting.spacing", f"transition energy {ch.transition_energy} is not a multiple")
    return cfg


def _beta(cfg):
    bath = cfg.bath
    if bath.get("zero_temperature", False):
        return math.inf
    beta = _number(bath, "bath", "beta", nonneg=True)
    return beta / _energy_scale(cfg)


def _energy_scale(cfg):
    return 1.0 if cfg.system.get("units", "nu") == "absolute" else cfg.nu


def build_model(cfg, **overrides):
    """Construct the SystemModel described by ``cfg`` (``overrides`` patch system keys)."""
    s = dict(cfg.system, **overrides)
    kind = s["type"]
    e = _energy_scale(cfg)
    nu = cfg.nu

    def energy(key, positive=False, nonneg=False, required=True, default=None):
        v = _number(s, "system", key, positive=positive, nonneg=nonneg, required=required, default=default)
        return None if v is None else v * e

    def rate():
        v = _number(cfg.bath, "bath", "gamma", positive=True)
        return v * e

    try:
        if kind == "driven_qubit":
            return models.build_driven_qubit(
                nu, energy("omega", nonneg=True), energy("omega_d", positive=True, required=False, default=1.0),
                rate(), _beta(cfg))
        if kind == "pulsed_qubit":
            omega_d = energy("omega_d", positive=True, required=False, default=1.0)
            periods = _number(s, "system", "drive_periods", positive=True, required=False, default=5.0)
            return models.build_pulsed_qubit(
                nu, energy("omega", nonneg=True), omega_d, rate(), _beta(cfg),
                t_stop=periods * 2 * math.pi / omega_d)
        if kind == "rwa_qubit":
            return models.build_rwa_qubit(energy("omega", nonneg=True), energy("delta", required=False, default=0.0),
                                          rate(), nu=nu)
        if kind == "harmonic_oscillator":
            n_fock = s.get("n_fock")
            if n_fock is not None and (not isinstance(n_fock, int) or n_fock < 2):
                raise ConfigError("system.n_fock", "must be an integer >= 2")
            beta = math.inf if "beta" not in cfg.bath and "zero_temperature" not in cfg.bath else _beta(cfg)
            return models.build_harmonic_oscillator(
                nu, energy("omega", nonneg=True), energy("omega_d", positive=True, required=False, default=nu),
                rate(), n_fock=n_fock, beta=beta, rotating_frame=bool(s.get("rotating_frame", True)))
        if kind == "coupled_qubits":
            return models.build_coupled_qubits(energy("omega", nonneg=True), energy("omega_xx", nonneg=True),
                                               rate(), nu=nu)
        if kind == "three_level":
            return models.build_three_level(energy("omega_r", positive=True), rate(), nu=nu)
        if kind == "undriven_qubit":
            return models.build_undriven_qubit(nu, rate(), _beta(cfg))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("system", str(exc)) from exc
    raise ConfigError("system.type", f"unsupported type {kind!r}")
