"""Run configuration: defaults, INI parsing, validation.

The configuration file is flat key-value text with sections; unknown
sections or keys are rejected so typos cannot silently fall back to
defaults.  Command-line flags override file values.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, fields, replace

from .compressible import GasParams
from .errors import ConfigError, InvalidParameterError
from .rigid import BodyGeometry


@dataclass
class RunConfig:
    """Everything one simulation needs, with the damping-study defaults.

    Units are the nondimensional ones of the model: |g| = 1, lengths as
    given, densities relative to the reference fluid density.
    """

    # geometry
    L: float = 0.4
    R0: float = 0.1
    R1: float = 0.2
    rho_B: float = 1.0
    # gas
    a: float = 10.0
    gamma: float = 5.0 / 3.0
    mu: float = 100.0
    lam: float = 0.0
    # initial data
    rho0: float = 1.0
    theta0: float = math.pi / 45.0
    omega0: float = 0.0
    # discretization
    target_h: float = 0.01
    dt: float = 1e-3
    t_end: float = 10.0
    stride: int = 1
    # solver selection
    solver: str = "compressible"
    rho_C: float = 1.0
    # output
    output: str = "trajectory.csv"

    def validate(self) -> None:
        """Raise ConfigError on any out-of-range value, before any compute."""
        try:
            self.body_geometry()
            self.gas_params()
        except InvalidParameterError as exc:
            raise ConfigError(str(exc)) from exc
        if self.rho0 <= 0.0:
            raise ConfigError(f"initial density must be positive, got {self.rho0}")
        if self.target_h <= 0.0 or self.target_h >= self.R0:
            raise ConfigError(
                f"target_h must lie in (0, R0), got {self.target_h} with R0={self.R0}"
            )
        if self.dt <= 0.0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_end <= 0.0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if self.stride < 1:
            raise ConfigError(f"stride must be at least 1, got {self.stride}")
        if self.solver not in ("compressible", "incompressible"):
            raise ConfigError(
                f"solver must be 'compressible' or 'incompressible', got {self.solver!r}"
            )
        if self.solver == "incompressible" and self.rho_C <= 0.0:
            raise ConfigError(f"rho_C must be positive, got {self.rho_C}")

    def body_geometry(self) -> BodyGeometry:
        return BodyGeometry(L=self.L, R0=self.R0, R1=self.R1, rho_B=self.rho_B)

    def gas_params(self) -> GasParams:
        return GasParams(a=self.a, gamma=self.gamma, mu=self.mu, lam=self.lam)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_SECTIONS = {
    "geometry": ("L", "R0", "R1", "rho_B"),
    "gas": ("a", "gamma", "mu", "lam"),
    "initial": ("rho0", "theta0", "omega0"),
    "discretization": ("target_h", "dt", "t_end", "stride"),
    "solver": ("solver", "rho_C"),
    "output": ("output",),
}

_INT_KEYS = {"stride"}
_STR_KEYS = {"solver", "output"}


def load_config(path: str) -> RunConfig:
    """Parse an INI-style config file into a RunConfig.

    Unknown sections or keys raise ConfigError naming the offender.
    """
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys are case-sensitive (L, R0, rho_B, ...)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc

    cfg = RunConfig()
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            cfg = replace(cfg, **{key: _convert(section, key, raw)})
    return cfg


def _convert(section: str, key: str, raw: str):
    if key in _STR_KEYS:
        return raw.strip()
    try:
        if key in _INT_KEYS:
            return int(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(
            f"value for {key!r} in [{section}] is not a number: {raw!r}"
        ) from exc


def apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    """Override config fields from a {name: value} mapping, skipping Nones."""
    valid = {f.name for f in fields(RunConfig)}
    updates = {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in valid:
            raise ConfigError(f"unknown configuration key {key!r}")
        updates[key] = value
    return replace(cfg, **updates)
