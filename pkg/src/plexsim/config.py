"""JSON run configuration with explicit energy units.

Every energy is a string carrying its unit, ``"2 eV"``, ``"350 meV"`` or
``"2eV"``; bare numbers are rejected.  Unknown keys are rejected at every
level.  Values are normalized to eV on parsing and serialized back as
``"<value> eV"`` so that parse -> serialize -> parse is the identity.
"""
from __future__ import annotations

import json
import re
from typing import Annotated, Literal

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, ValidationError, model_validator

from .errors import ConfigError
from .hilbert import EmitterSpec, SystemSpec

_ENERGY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(eV|meV)\s*$")
# divide rather than multiply so "350 meV" lands exactly on 0.35
_UNIT_DIVISOR = {"eV": 1.0, "meV": 1000.0}


def parse_energy(value) -> float:
    """``"350 meV"`` -> 0.35.  A number without a unit is an error."""
    if isinstance(value, bool) or not isinstance(value, str):
        raise ValueError(f"energy must be a string with unit 'eV' or 'meV', got {value!r}")
    m = _ENERGY.match(value)
    if not m:
        raise ValueError(f"cannot parse energy {value!r}; expected e.g. '2 eV' or '350 meV'")
    number, unit = m.groups()
    return float(number) / _UNIT_DIVISOR[unit]


def format_energy(value: float) -> str:
    return f"{float(value)!r} eV"


Energy = Annotated[float, BeforeValidator(parse_energy), PlainSerializer(format_energy, return_type=str)]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, validate_default=True)


class EmitterConfig(_Strict):
    label: str = "e"
    omega_e: Energy
    gamma_e: Energy
    g: Energy


class SystemConfig(_Strict):
    omega_c: Energy
    kappa: Energy
    drive_omega: Energy
    drive_amplitude: Energy | None = None
    n_max: int = Field(6, ge=1)
    emitters: list[EmitterConfig] = []

    def to_spec(self, n_max: int | None = None) -> SystemSpec:
        return SystemSpec(
            omega_c=self.omega_c,
            kappa=self.kappa,
            drive_omega=self.drive_omega,
            emitters=tuple(EmitterSpec(e.omega_e, e.gamma_e, e.g, e.label) for e in self.emitters),
            drive_amplitude=self.drive_amplitude,
            n_max=self.n_max if n_max is None else n_max,
        )


class _GridBase(_Strict):
    @model_validator(mode="after")
    def _one_form(self):
        explicit = self.values is not None
        ranged = self.start is not None or self.stop is not None
        if explicit == ranged:
            raise ValueError("give either 'values' or 'start'/'stop'/'points'")
        if ranged and (self.start is None or self.stop is None):
            raise ValueError("a ranged grid needs both 'start' and 'stop'")
        return self

    def grid(self) -> tuple[float, ...]:
        if self.values is not None:
            return tuple(float(v) for v in self.values)
        return tuple(float(x) for x in np.linspace(self.start, self.stop, self.points))


class EnergyGrid(_GridBase):
    values: list[Energy] | None = None
    start: Energy | None = None
    stop: Energy | None = None
    points: int = Field(81, ge=1)


class PlainGrid(_GridBase):
    values: list[float] | None = None
    start: float | None = None
    stop: float | None = None
    points: int = Field(81, ge=1)


class AxisConfig(_Strict):
    path: str
    grid: EnergyGrid


class SweepConfig(_Strict):
    axis1: AxisConfig
    axis2: AxisConfig | None = None
    outputs: list[Literal["g2", "g3", "mean_n", "regime", "delta_theta"]] = ["g2", "g3", "mean_n", "regime"]


class ChemicalConfig(_Strict):
    name: Literal["chemical"]
    fractions: PlainGrid
    omegas: EnergyGrid = Field(default_factory=lambda: EnergyGrid(values=["2 eV"]))
    peak_coupling: Energy = "100 meV"


class OpticalConfig(_Strict):
    name: Literal["optical"]
    alphas_deg: PlainGrid
    omega: Energy = "2 eV"
    peak_coupling: Energy = "85 meV"


class SecondEmitterConfig(_Strict):
    name: Literal["second-emitter"]
    delta_e2c: EnergyGrid
    omegas: EnergyGrid
    g_e2: Energy
    gamma_e2: Energy = "60 meV"


class SpectrumConfig(_Strict):
    omegas: EnergyGrid


class LevelsConfig(_Strict):
    max_manifold: int = Field(3, ge=0)


class OutputConfig(_Strict):
    path: str | None = None
    format: Literal["csv", "json"] | None = None
    plot: bool = False


class RunConfig(_Strict):
    system: SystemConfig | None = None
    engine: Literal["master-equation", "eom"] = "master-equation"
    n_max: int | None = Field(None, ge=1)
    sweep: SweepConfig | None = None
    scenario: ChemicalConfig | OpticalConfig | SecondEmitterConfig | None = Field(None, discriminator="name")
    spectrum: SpectrumConfig | None = None
    levels: LevelsConfig | None = None
    output: OutputConfig = Field(default_factory=OutputConfig)

    def system_spec(self) -> SystemSpec:
        if self.system is None:
            raise ConfigError("configuration has no 'system' block")
        try:
            return self.system.to_spec(self.n_max)
        except ValueError as exc:
            raise ConfigError(f"system: {exc}") from exc

    def serialize(self) -> str:
        return json.dumps(self.model_dump(mode="json", exclude_none=True), indent=2)


def _format_errors(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def parse_config(text: str) -> RunConfig:
    """Validate a JSON configuration document; errors name the offending field."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from exc


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
