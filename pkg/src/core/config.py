"""
Experiment configuration.

The JSON file speaks Hz / mbar / amu; the models hold SI with angular frequencies.
Conversion happens only in load_config / dump_config.
"""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from core.constants import (
    AMU,
    C_LIGHT,
    CRYO_THRESHOLD_K,
    DEFAULT_DENSITY,
    DEFAULT_GAS_MASS_U,
    MBAR_TO_PA,
    PAPER_DEFAULTS_PATH,
    RECOIL_DIRECTION_FACTORS,
    TWO_PI,
)
from core.errors import ConfigError
from core.physpar import PhysicalConstants, mass_from_diameter

logger = logging.getLogger(__name__)

_FROZEN = ConfigDict(frozen=True, extra="forbid")


class ParticleSpec(BaseModel):
    model_config = _FROZEN

    diameter: float = Field(gt=0)
    density: float = Field(DEFAULT_DENSITY, gt=0)
    refractive_eps: float = Field(2.1, gt=1.0)
    eps_bb_real: float = 2.1
    eps_bb_imag: float = Field(0.57, ge=0)
    T_internal: float = Field(700.0, gt=0)

    @property
    def radius(self) -> float:
        return self.diameter / 2.0

    @property
    def mass(self) -> float:
        return mass_from_diameter(self.diameter, self.density)

    @property
    def volume(self) -> float:
        return (4.0 / 3.0) * math.pi * self.radius**3

    @property
    def eps_bb(self) -> complex:
        return complex(self.eps_bb_real, self.eps_bb_imag)


class TrapSpec(BaseModel):
    model_config = _FROZEN

    power: float = Field(gt=0)
    wavelength: float = Field(gt=0)
    waist_x: float = Field(gt=0)
    waist_y: float = Field(gt=0)
    omega_mech: tuple[float, float, float]
    recoil_factors: tuple[float, float, float] = RECOIL_DIRECTION_FACTORS

    @model_validator(mode="after")
    def _check_frequencies(self) -> "TrapSpec":
        if any(w <= 0 for w in self.omega_mech):
            raise ValueError("all mechanical frequencies must be > 0")
        if any(a <= 0 for a in self.recoil_factors):
            raise ValueError("recoil direction factors must be > 0")
        wx, wy, wz = self.omega_mech
        if not (wx > wy > wz):
            # the published ordering, not a physical requirement
            logger.warning("mechanical frequencies are not ordered x > y > z: %s", self.omega_mech)
        return self

    @property
    def wavenumber(self) -> float:
        return TWO_PI / self.wavelength

    @property
    def rayleigh_length(self) -> float:
        return self.waist_x * self.waist_y * math.pi / self.wavelength

    @property
    def omega_tw(self) -> float:
        return TWO_PI * C_LIGHT / self.wavelength

    @property
    def omega_x(self) -> float:
        return self.omega_mech[0]

    @property
    def omega_y(self) -> float:
        return self.omega_mech[1]

    @property
    def omega_z(self) -> float:
        return self.omega_mech[2]

    @property
    def node_position(self) -> float:
        return self.wavelength / 4.0


class CavitySpec(BaseModel):
    model_config = _FROZEN

    kappa: float = Field(gt=0)
    kappa_sigma: float = Field(0.0, ge=0)
    fsr: float = Field(gt=0)
    length: Optional[float] = Field(None, gt=0)
    finesse: Optional[float] = Field(None, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _fill_derived(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("fsr"):
            data = dict(data)
            if data.get("length") is None:
                data["length"] = C_LIGHT * math.pi / data["fsr"]
            if data.get("finesse") is None and data.get("kappa"):
                data["finesse"] = data["fsr"] / data["kappa"]
        return data

    @model_validator(mode="after")
    def _check_consistency(self) -> "CavitySpec":
        expected_length = C_LIGHT * math.pi / self.fsr
        if abs(self.length - expected_length) > 0.01 * expected_length:
            raise ValueError(
                f"{_describe('cavity', 'length')} = {self.length:.6g} inconsistent with c*pi/fsr = {expected_length:.6g} m"
            )
        expected_finesse = self.fsr / self.kappa
        if abs(self.finesse - expected_finesse) > 0.05 * expected_finesse:
            raise ValueError(
                f"{_describe('cavity', 'finesse')} = {self.finesse:.6g} inconsistent with fsr/kappa = {expected_finesse:.6g}"
            )
        return self


class EnvironmentSpec(BaseModel):
    model_config = _FROZEN

    pressure: float = Field(gt=0)
    temperature: float = Field(300.0, gt=0)
    gas_molecule_mass: float = Field(DEFAULT_GAS_MASS_U * AMU, gt=0)
    gas_heating_rate: Optional[float] = Field(None, gt=0)
    pressure_range: Optional[tuple[float, float]] = None

    @model_validator(mode="after")
    def _check_range(self) -> "EnvironmentSpec":
        if self.pressure_range is not None:
            lo, hi = self.pressure_range
            if not (0 < lo <= hi):
                raise ValueError(f"pressure_range must satisfy 0 < low <= high, got {self.pressure_range}")
        return self


class DriveSpec(BaseModel):
    model_config = _FROZEN

    detuning: float
    detuning_sigma: float = Field(0.0, ge=0)
    drive_amplitude: float = Field(gt=0)
    particle_position: Optional[float] = None
    coupling_x: float = Field(ge=0)
    lo_power: float = Field(0.0, ge=0)
    het_freq: float = Field(gt=0)
    phase_noise_psd: float = Field(0.0, ge=0)
    phase_heating_rate: float = Field(0.0, ge=0)
    # (angular frequency, RIN in dB/Hz)
    rin_table: tuple[tuple[float, float], ...] = ((0.0, -135.0),)
    c_pp: float = Field(2.5e-3, ge=0)
    c_qq: float = Field(2e-5, ge=0)
    n_int: float = Field(1e-4, ge=0)

    def rin_psd(self, omega: float) -> float:
        """Relative intensity noise (1/Hz) at angular frequency omega, interpolated in dB."""
        table = np.asarray(self.rin_table, dtype=float)
        db = np.interp(omega, table[:, 0], table[:, 1])
        return float(10.0 ** (db / 10.0))


class HeterodyneSpec(BaseModel):
    model_config = _FROZEN

    gamma_x: float = Field(TWO_PI * 48e3, gt=0)
    gamma_y: float = Field(TWO_PI * 2e3, gt=0)
    weight_x: Optional[float] = Field(None, ge=0)
    weight_y: float = Field(TWO_PI * 4.2e3, ge=0)
    n_y: float = Field(20.0, ge=0)
    n_avg: int = Field(500, ge=1)
    band_lo: float = Field(TWO_PI * 100e3, gt=0)
    band_hi: float = Field(TWO_PI * 500e3, gt=0)
    bin: float = Field(TWO_PI * 250.0, gt=0)

    @model_validator(mode="after")
    def _check_band(self) -> "HeterodyneSpec":
        if self.band_hi <= self.band_lo:
            raise ValueError("band_hi must exceed band_lo")
        return self


class FreeFallSpec(BaseModel):
    model_config = _FROZEN

    n_bar: float = Field(0.43, ge=0)
    heating_rate: Optional[float] = Field(None, gt=0)
    gas_heating_rate: Optional[float] = Field(None, gt=0)
    lambda_bb_sc: float = Field(1e15, ge=0)
    lambda_bb_e: float = Field(2.3e20, ge=0)
    lambda_bb_a: float = Field(1.4e18, ge=0)
    target_sigma: Optional[float] = Field(None, gt=0)
    cryo_threshold: float = Field(CRYO_THRESHOLD_K, gt=0)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    constants: PhysicalConstants = Field(default_factory=PhysicalConstants)
    particle: ParticleSpec
    trap: TrapSpec
    cavity: CavitySpec
    environment: EnvironmentSpec
    drive: DriveSpec
    heterodyne: HeterodyneSpec = Field(default_factory=HeterodyneSpec)
    free_fall: FreeFallSpec = Field(default_factory=FreeFallSpec)

    @model_validator(mode="after")
    def _cross_checks(self) -> "ExperimentConfig":
        if self.drive.het_freq <= max(self.trap.omega_mech):
            raise ValueError(
                f"{_describe('drive', 'het_freq')} = {self.drive.het_freq / TWO_PI:.6g} must exceed every"
                f" mechanical frequency (highest {max(self.trap.omega_mech) / TWO_PI:.6g} Hz)"
            )
        return self

    @property
    def particle_position(self) -> float:
        # default: 3 nm from the node at lambda/4
        if self.drive.particle_position is not None:
            return self.drive.particle_position
        return self.trap.node_position + 3e-9

    @property
    def sideband_weight_x(self) -> float:
        # photon-flux scale 16 g^2 / kappa of the x sidebands in shot-noise units
        if self.heterodyne.weight_x is not None:
            return self.heterodyne.weight_x
        return 16.0 * self.drive.coupling_x**2 / self.cavity.kappa

    def with_updates(self, section: str, **changes: Any) -> "ExperimentConfig":
        """Copy with some fields of one section replaced (re-validated)."""
        current = getattr(self, section)
        base = current.model_dump()
        if section == "cavity":
            # derived fields follow kappa / fsr unless given explicitly
            for derived in ("length", "finesse"):
                if derived not in changes:
                    base.pop(derived)
        updated = type(current).model_validate({**base, **changes})
        return ExperimentConfig.model_validate({**self._sections(), section: updated})

    def _sections(self) -> dict[str, Any]:
        return {name: getattr(self, name) for name in type(self).model_fields}


# file key -> (internal field, conversion, unit label)
_FILE_SCHEMA: dict[str, dict[str, tuple[str, str, str]]] = {
    "particle": {
        "diameter_m": ("diameter", "plain", "m"),
        "density_kg_m3": ("density", "plain", "kg/m^3"),
        "refractive_eps": ("refractive_eps", "plain", "1"),
        "eps_bb_real": ("eps_bb_real", "plain", "1"),
        "eps_bb_imag": ("eps_bb_imag", "plain", "1"),
        "T_internal_k": ("T_internal", "plain", "K"),
    },
    "trap": {
        "power_w": ("power", "plain", "W"),
        "wavelength_m": ("wavelength", "plain", "m"),
        "waist_x_m": ("waist_x", "plain", "m"),
        "waist_y_m": ("waist_y", "plain", "m"),
        "omega_mech_hz": ("omega_mech", "hz", "Hz"),
        "recoil_direction_factors": ("recoil_factors", "plain", "1"),
    },
    "cavity": {
        "kappa_hz": ("kappa", "hz", "Hz"),
        "kappa_sigma_hz": ("kappa_sigma", "hz", "Hz"),
        "fsr_hz": ("fsr", "hz", "Hz"),
        "length_m": ("length", "plain", "m"),
        "finesse": ("finesse", "plain", "1"),
    },
    "environment": {
        "pressure_mbar": ("pressure", "mbar", "mbar"),
        "temperature_k": ("temperature", "plain", "K"),
        "gas_molecule_mass_u": ("gas_molecule_mass", "u", "u"),
        "gas_heating_rate_hz": ("gas_heating_rate", "hz", "Hz"),
        "pressure_range_mbar": ("pressure_range", "mbar", "mbar"),
    },
    "drive": {
        "detuning_hz": ("detuning", "hz", "Hz"),
        "detuning_sigma_hz": ("detuning_sigma", "hz", "Hz"),
        "drive_amplitude_hz": ("drive_amplitude", "hz", "Hz"),
        "particle_position_m": ("particle_position", "plain", "m"),
        "coupling_x_hz": ("coupling_x", "hz", "Hz"),
        "lo_power_w": ("lo_power", "plain", "W"),
        "het_freq_hz": ("het_freq", "hz", "Hz"),
        "phase_noise_psd_hz2_per_hz": ("phase_noise_psd", "plain", "Hz^2/Hz"),
        "phase_heating_rate_hz": ("phase_heating_rate", "hz", "Hz"),
        "rin_table": ("rin_table", "rin", "[Hz, dB/Hz]"),
        "c_pp": ("c_pp", "plain", "1"),
        "c_qq": ("c_qq", "plain", "1"),
        "n_int": ("n_int", "plain", "phonons"),
    },
    "heterodyne": {
        "gamma_x_hz": ("gamma_x", "hz", "Hz"),
        "gamma_y_hz": ("gamma_y", "hz", "Hz"),
        "weight_x_hz": ("weight_x", "hz", "Hz"),
        "weight_y_hz": ("weight_y", "hz", "Hz"),
        "n_y": ("n_y", "plain", "phonons"),
        "n_avg": ("n_avg", "plain", "1"),
        "band_lo_hz": ("band_lo", "hz", "Hz"),
        "band_hi_hz": ("band_hi", "hz", "Hz"),
        "bin_hz": ("bin", "hz", "Hz"),
    },
    "free_fall": {
        "n_bar": ("n_bar", "plain", "phonons"),
        "heating_rate_hz": ("heating_rate", "hz", "Hz"),
        "gas_heating_rate_hz": ("gas_heating_rate", "hz", "Hz"),
        "lambda_bb_sc": ("lambda_bb_sc", "plain", "Hz/m^2"),
        "lambda_bb_e": ("lambda_bb_e", "plain", "Hz/m^2"),
        "lambda_bb_a": ("lambda_bb_a", "plain", "Hz/m^2"),
        "target_sigma_m": ("target_sigma", "plain", "m"),
        "cryo_threshold_k": ("cryo_threshold", "plain", "K"),
    },
}

_REQUIRED_SECTIONS = ("particle", "trap", "cavity", "environment", "drive")


def _to_internal(value: Any, kind: str) -> Any:
    if value is None:
        return None
    if kind == "hz":
        return [TWO_PI * float(v) for v in value] if isinstance(value, (list, tuple)) else TWO_PI * float(value)
    if kind == "mbar":
        return [MBAR_TO_PA * float(v) for v in value] if isinstance(value, (list, tuple)) else MBAR_TO_PA * float(value)
    if kind == "u":
        return float(value) * AMU
    if kind == "rin":
        return [(TWO_PI * float(f), float(db)) for f, db in value]
    return value


def _to_file(value: Any, kind: str) -> Any:
    if value is None:
        return None
    if kind == "hz":
        return [float(v) / TWO_PI for v in value] if isinstance(value, (list, tuple)) else float(value) / TWO_PI
    if kind == "mbar":
        return [float(v) / MBAR_TO_PA for v in value] if isinstance(value, (list, tuple)) else float(value) / MBAR_TO_PA
    if kind == "u":
        return float(value) / AMU
    if kind == "rin":
        return [[float(f) / TWO_PI, float(db)] for f, db in value]
    if isinstance(value, tuple):
        return list(value)
    return value


def _describe(section: str, internal: str) -> str:
    for file_key, (name, _, unit) in _FILE_SCHEMA.get(section, {}).items():
        if name == internal:
            return f"{section}.{file_key} [{unit}]"
    return f"{section}.{internal}"


def _format_validation(err: ValidationError) -> list[str]:
    problems = []
    for item in err.errors():
        loc = [str(p) for p in item["loc"]]
        if len(loc) >= 2 and loc[0] in _FILE_SCHEMA:
            where = _describe(loc[0], loc[1])
        elif loc:
            where = ".".join(loc)
        else:
            where = "config"
        problems.append(f"{where}: {item['msg']}")
    return problems


def config_from_dict(raw: dict[str, Any]) -> ExperimentConfig:
    """Build a validated config from the file-unit dictionary (Hz, mbar, u)."""
    problems: list[str] = []
    sections: dict[str, Any] = {}

    for name in raw:
        if name not in _FILE_SCHEMA:
            problems.append(f"{name}: unknown section")
    for name in _REQUIRED_SECTIONS:
        if name not in raw:
            problems.append(f"{name}: missing section")

    for name, schema in _FILE_SCHEMA.items():
        if name not in raw:
            continue
        converted = {}
        for key, value in (raw[name] or {}).items():
            if key not in schema:
                problems.append(f"{name}.{key}: unknown field")
                continue
            internal, kind, unit = schema[key]
            try:
                converted[internal] = _to_internal(value, kind)
            except (TypeError, ValueError):
                problems.append(f"{name}.{key} [{unit}]: cannot interpret {value!r}")
        sections[name] = converted

    if problems:
        raise ConfigError(problems)

    try:
        return ExperimentConfig.model_validate(sections)
    except ValidationError as err:
        raise ConfigError(_format_validation(err)) from err


def load_config(path: Path | str = PAPER_DEFAULTS_PATH) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found at: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: not valid JSON ({err})") from err
    cfg = config_from_dict(raw)
    logger.info("loaded config %s", path)
    return cfg


def dump_config(cfg: ExperimentConfig) -> dict[str, Any]:
    """Inverse of config_from_dict: file units, JSON serializable."""
    out: dict[str, Any] = {}
    for name, schema in _FILE_SCHEMA.items():
        section = getattr(cfg, name)
        out[name] = {
            key: _to_file(getattr(section, internal), kind) for key, (internal, kind, _) in schema.items()
        }
    return out


def paper_defaults() -> ExperimentConfig:
    return load_config(PAPER_DEFAULTS_PATH)
