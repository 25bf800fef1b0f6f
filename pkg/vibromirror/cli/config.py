# vibromirror/cli/config.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

"""
Experiment configuration: a flat `key = value` file plus `--set key=value`
overrides, validated into an ExperimentConfig.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from typing_extensions import Annotated

from vibromirror.core.errors import ConfigurationError
from vibromirror.core.mirror import DEFAULT_V0_FACTOR
from vibromirror.runtime.tdse import BounceSetup, GridSpec

KEY_ALIASES = {"q": "Q", "p_i": "P_i", "eps": "epsilon"}
SWEEP_VARIABLES = ("Q", "epsilon", "P_i", "phi")
COMPARE_METHODS = ("born", "semiclassical", "tdse")


class Method(str, Enum):
    BORN = "born"
    SEMICLASSICAL = "semiclassical"
    TDSE = "tdse"
    CLASSICAL = "classical"
    INTERFEROMETER = "interferometer"
    COMPARE = "compare"
    UNITS = "units"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class Snapshot(str, Enum):
    SPECTRUM = "spectrum"
    WAVEPACKET = "wavepacket"


class AmplitudeSource(str, Enum):
    SEMICLASSICAL = "semiclassical"
    TDSE = "tdse"


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    steps: int

    def values(self) -> List[float]:
        if self.steps == 1:
            return [self.start]
        return [float(v) for v in np.linspace(self.start, self.stop, self.steps)]


class ExperimentConfig(BaseModel):
    """
    Every parameter of one run. Field names are the keys of the flat config file.
    """

    model_config = ConfigDict(frozen=True, extra="forbid", use_enum_values=False)

    method: Method
    P_i: Annotated[float, Field(gt=0.0)] = 100.0
    Q: Optional[Annotated[float, Field(ge=0.0)]] = None
    epsilon: Annotated[float, Field(ge=0.0, le=1.0)] = 1.0
    phi: float = 0.0
    V0: Optional[Annotated[float, Field(gt=0.0)]] = None
    v0_factor: Annotated[float, Field(gt=0.0)] = DEFAULT_V0_FACTOR

    z_min: float = -25.0
    z_max: float = 25.0
    n_points: Annotated[int, Field(ge=16)] = 8192
    dt: Optional[Annotated[float, Field(gt=0.0)]] = None
    z_i: float = 13.0
    dz_i: Annotated[float, Field(gt=0.0)] = 2.0
    clearance: Annotated[float, Field(ge=0.0)] = 1.0
    orders: Tuple[int, ...] = (-1, 0, 1)
    snapshot: Snapshot = Snapshot.SPECTRUM

    methods: Tuple[str, ...] = COMPARE_METHODS
    n_phases: Annotated[int, Field(ge=1)] = 16

    eps1: Annotated[float, Field(ge=0.0, le=1.0)] = 0.6
    eps2: Annotated[float, Field(ge=0.0, le=1.0)] = 1.0
    eps3: Annotated[float, Field(ge=0.0, le=1.0)] = 0.6
    n_theta: Annotated[int, Field(ge=2)] = 65
    source: AmplitudeSource = AmplitudeSource.SEMICLASSICAL

    sweep_var: Optional[str] = None
    sweep_start: Optional[float] = None
    sweep_stop: Optional[float] = None
    sweep_steps: Optional[int] = None

    out: Optional[str] = None
    format: OutputFormat = OutputFormat.CSV

    @field_validator("orders", "methods", mode="before")
    @classmethod
    def _split_list(cls, value: Any) -> Any:
        if isinstance(value, str):
            return tuple(part.strip() for part in value.split(",") if part.strip())
        return value

    @field_validator("methods")
    @classmethod
    def _known_methods(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        unknown = [m for m in value if m not in COMPARE_METHODS]
        if unknown:
            raise ValueError(f"unknown compare methods {unknown}; choose from {list(COMPARE_METHODS)}")
        return value

    @model_validator(mode="after")
    def _check_sweep(self) -> "ExperimentConfig":
        if self.sweep_var is None:
            return self
        if self.sweep_var not in SWEEP_VARIABLES:
            raise ValueError(f"sweep_var must be one of {list(SWEEP_VARIABLES)}, got '{self.sweep_var}'")
        if None in (self.sweep_start, self.sweep_stop, self.sweep_steps):
            raise ValueError("sweep_var needs sweep_start, sweep_stop and sweep_steps")
        return self

    @property
    def sweep(self) -> Optional[SweepSpec]:
        if self.sweep_var is None:
            return None
        return SweepSpec(self.sweep_var, self.sweep_start, self.sweep_stop, self.sweep_steps)

    @property
    def depths(self) -> Tuple[float, float, float]:
        return (self.eps1, self.eps2, self.eps3)

    def supports_sweep(self) -> bool:
        return self.method not in (Method.INTERFEROMETER, Method.UNITS)

    def required_fields(self) -> List[str]:
        """Fields the method needs that have no default, except the swept one."""
        required = ["Q"]
        return [name for name in required if name != self.sweep_var]

    def at(self, value: Optional[float]) -> "ExperimentConfig":
        """Copy with the swept variable set to value."""
        if value is None or self.sweep_var is None:
            return self
        return self.model_copy(update={self.sweep_var: value})

    def potential_amplitude(self) -> float:
        return self.V0 if self.V0 is not None else self.v0_factor * 0.5 * self.P_i**2

    def grid(self) -> GridSpec:
        return GridSpec(z_min=self.z_min, z_max=self.z_max, n_points=self.n_points, dt=self.dt)

    def bounce_setup(self) -> BounceSetup:
        return BounceSetup(
            P_i=self.P_i,
            Q=self.Q,
            epsilon=self.epsilon,
            phi=self.phi,
            z_i=self.z_i,
            dz_i=self.dz_i,
            grid=self.grid(),
            v0_factor=self.potential_amplitude() / (0.5 * self.P_i**2),
            clearance=self.clearance,
            orders=self.orders,
        )

    def to_flat(self) -> Dict[str, str]:
        """Flat string form; from_flat(to_flat()) reproduces the config."""
        flat: Dict[str, str] = {}
        for name in type(self).model_fields:
            value = getattr(self, name)
            if value is None:
                continue
            flat[name] = _format_flat(value)
        return flat

    @classmethod
    def from_flat(cls, flat: Mapping[str, str]) -> "ExperimentConfig":
        return cls.model_validate({KEY_ALIASES.get(k, k): v for k, v in flat.items()})


def _format_flat(value: Any) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


class ConfigSyntaxError(ConfigurationError):
    """
    Raised for malformed lines, unknown keys or invalid values; the message
    starts with `source:line:`.
    """

    pass


@dataclass(frozen=True)
class ConfigEntry:
    key: str
    value: str
    source: str
    line: int

    @property
    def where(self) -> str:
        return f"{self.source}:{self.line}"


def _entry(raw: str, source: str, line: int) -> Optional[ConfigEntry]:
    text = raw.split("#", 1)[0].strip()
    if not text:
        return None
    if "=" not in text:
        raise ConfigSyntaxError(f"{source}:{line}: expected 'key = value', got '{raw.strip()}'")
    key, value = (part.strip() for part in text.split("=", 1))
    key = KEY_ALIASES.get(key, key)
    if not key:
        raise ConfigSyntaxError(f"{source}:{line}: missing key before '='")
    if key not in ExperimentConfig.model_fields:
        raise ConfigSyntaxError(f"{source}:{line}: unknown key '{key}'")
    return ConfigEntry(key=key, value=value, source=source, line=line)


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, ConfigEntry]:
    """
    Parse `key = value` lines; '#' starts a comment.

    :raises ConfigSyntaxError: For malformed lines, unknown or repeated keys.
    """
    entries: Dict[str, ConfigEntry] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        entry = _entry(raw, source, number)
        if entry is None:
            continue
        if entry.key in entries:
            raise ConfigSyntaxError(f"{entry.where}: key '{entry.key}' already set on line {entries[entry.key].line}")
        entries[entry.key] = entry
    return entries


def parse_config_file(path: Union[str, Path]) -> Dict[str, ConfigEntry]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, str(path))


def parse_overrides(items: Sequence[str]) -> Dict[str, ConfigEntry]:
    """`--set key=value` items; later items win."""
    entries: Dict[str, ConfigEntry] = {}
    for number, item in enumerate(items, start=1):
        entry = _entry(item, "--set", number)
        if entry is not None:
            entries[entry.key] = entry
    return entries


def build_config(
    entries: Mapping[str, ConfigEntry],
    base: Optional[ExperimentConfig] = None,
    method: Optional[str] = None,
) -> ExperimentConfig:
    """
    Merge entries over a base config (e.g. a preset) and validate.

    :raises ConfigSyntaxError: Pointing at the line of the first invalid value.
    """
    data: Dict[str, Any] = dict(base.to_flat()) if base is not None else {}
    data.update({key: entry.value for key, entry in entries.items()})
    if method is not None:
        data["method"] = method
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        error = exc.errors()[0]
        field = str(error["loc"][0]) if error["loc"] else ""
        entry = entries.get(field)
        where = entry.where if entry is not None else ("<command line>" if field == "method" else "<config>")
        label = f"{field}: " if field else ""
        raise ConfigSyntaxError(f"{where}: {label}{error['msg']}") from exc
