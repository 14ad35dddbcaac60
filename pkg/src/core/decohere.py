"""
Free-fall coherence forecast.

Localization parameters come from measured heating rates (Lambda = Gamma / x_zpf^2). Short
separations use the diffusive expansion (t_max, xi_max); beyond the gas de Broglie wavelength
the decoherence rate saturates at lambda_th^2 Lambda_gas, which fixes the pressure needed to let
the wavepacket grow to a target size.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from core.constants import HBAR, MBAR_TO_PA
from core.errors import DomainError, require_non_negative, require_positive
from core.physpar import thermal_de_broglie, zero_point_fluctuation

if TYPE_CHECKING:
    from core.config import ExperimentConfig

logger = logging.getLogger(__name__)


def localization_parameter(Gamma: float, x_zpf: float) -> float:
    require_positive(Gamma=Gamma, x_zpf=x_zpf)
    return Gamma / x_zpf**2


def short_distance_expansion(Lambda: float, mass: float, omega: float, n_bar: float) -> tuple[float, float]:
    """
    Coherence time and length while the diffusive (short-distance) picture holds:

        t_max  = (3 m (2n+1) / (2 Lambda hbar Omega))^(1/3)
        xi_max = sqrt(2) (2 hbar Omega / (3 m Lambda^2 (2n+1)))^(1/6)
    """
    require_positive(Lambda=Lambda, mass=mass, omega=omega)
    require_non_negative(n_bar=n_bar)
    spread = 2.0 * n_bar + 1.0
    t_max = (3.0 * mass * spread / (2.0 * Lambda * HBAR * omega)) ** (1.0 / 3.0)
    xi_max = math.sqrt(2.0) * (2.0 * HBAR * omega / (3.0 * mass * Lambda**2 * spread)) ** (1.0 / 6.0)
    return t_max, xi_max


def saturation_rate(Lambda_gas: float, lambda_th: float) -> float:
    require_positive(Lambda_gas=Lambda_gas, lambda_th=lambda_th)
    return lambda_th**2 * Lambda_gas


@dataclass(frozen=True)
class FreeFallReport:
    x_zpf: float
    omega: float
    Lambda: float
    Lambda_gas: float
    Lambda_bb_sc: float
    Lambda_bb_e: float
    Lambda_bb_a: float
    t_max: float
    xi_max: float
    lambda_th: float
    Gamma_sat: float
    target_sigma: float
    tau_target: float
    required_rate: float
    pressure: float
    required_pressure: float
    t_max_bb: float
    xi_max_bb: float
    blackbody_dominates: bool
    cryo_threshold: float

    def __post_init__(self) -> None:
        for name in ("Lambda", "Lambda_gas", "t_max", "xi_max", "Gamma_sat", "tau_target", "required_pressure"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")

    @property
    def Lambda_bb(self) -> float:
        return self.Lambda_bb_sc + self.Lambda_bb_e + self.Lambda_bb_a

    @property
    def reduction_factor(self) -> float:
        return self.pressure / self.required_pressure if self.required_pressure > 0 else math.inf

    @property
    def cryogenic_note(self) -> str:
        return (
            f"blackbody decoherence becomes negligible below an internal temperature of about "
            f"{self.cryo_threshold:g} K"
        )

    def expansion_sigma(self, t):
        """Undisturbed wavepacket size x_zpf (1 + Omega t)."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("expansion time must be >= 0")
        return self.x_zpf * (1.0 + self.omega * t)

    def as_report(self) -> dict:
        out = asdict(self)
        out.update(
            Lambda_bb=self.Lambda_bb,
            pressure_pa=self.pressure,
            pressure_mbar=self.pressure / MBAR_TO_PA,
            required_pressure_pa=self.required_pressure,
            required_pressure_mbar=self.required_pressure / MBAR_TO_PA,
            reduction_factor=self.reduction_factor,
            cryogenic_note=self.cryogenic_note,
            sigma_of_t="x_zpf * (1 + omega * t)",
        )
        del out["pressure"], out["required_pressure"]
        return out


def _heating_rates(config: "ExperimentConfig") -> tuple[float, float]:
    ff = config.free_fall
    if ff.heating_rate is not None and ff.gas_heating_rate is not None:
        return ff.heating_rate, ff.gas_heating_rate
    from core.budget import total_budget

    budget = total_budget(config)
    total = ff.heating_rate if ff.heating_rate is not None else budget.Gamma_total
    gas = ff.gas_heating_rate if ff.gas_heating_rate is not None else budget.Gamma_gas
    return total, gas


def free_fall_plan(config: "ExperimentConfig", target_sigma: Optional[float] = None) -> FreeFallReport:
    """
    Forecast for releasing the x mode from the trap.

    The target defaults to the particle radius. The required pressure scales the current one by
    required_rate / Gamma_sat; blackbody Lambda goes through the same short-distance expansion.
    """
    particle, trap, env, ff = config.particle, config.trap, config.environment, config.free_fall
    omega = trap.omega_x
    x_zpf = zero_point_fluctuation(particle.mass, omega)

    if target_sigma is None:
        target_sigma = ff.target_sigma if ff.target_sigma is not None else particle.radius
    require_positive(target_sigma=target_sigma)
    if target_sigma < x_zpf * (1 - 1e-12):
        raise DomainError(f"target_sigma {target_sigma:.3g} m below x_zpf {x_zpf:.3g} m")

    heat_total, heat_gas = _heating_rates(config)
    Lambda = localization_parameter(heat_total, x_zpf)
    Lambda_gas = localization_parameter(heat_gas, x_zpf)
    t_max, xi_max = short_distance_expansion(Lambda, particle.mass, omega, ff.n_bar)

    lam_th = thermal_de_broglie(env.gas_molecule_mass, env.temperature)
    gamma_sat = saturation_rate(Lambda_gas, lam_th)

    tau = max(target_sigma / x_zpf - 1.0, 0.0) / omega
    if tau == 0.0:
        required_rate, required_pressure = math.inf, env.pressure
    else:
        required_rate = 1.0 / tau
        required_pressure = env.pressure * required_rate / gamma_sat

    bb = ff.lambda_bb_sc + ff.lambda_bb_e + ff.lambda_bb_a
    if bb > 0:
        t_bb, xi_bb = short_distance_expansion(bb, particle.mass, omega, ff.n_bar)
    else:
        t_bb, xi_bb = math.inf, math.inf
    # gas Lambda at the required pressure against the blackbody floor
    lambda_gas_required = Lambda_gas * required_pressure / env.pressure
    bb_dominates = bb > lambda_gas_required

    report = FreeFallReport(
        x_zpf=x_zpf,
        omega=omega,
        Lambda=Lambda,
        Lambda_gas=Lambda_gas,
        Lambda_bb_sc=ff.lambda_bb_sc,
        Lambda_bb_e=ff.lambda_bb_e,
        Lambda_bb_a=ff.lambda_bb_a,
        t_max=t_max,
        xi_max=xi_max,
        lambda_th=lam_th,
        Gamma_sat=gamma_sat,
        target_sigma=target_sigma,
        tau_target=tau,
        required_rate=required_rate,
        pressure=env.pressure,
        required_pressure=required_pressure,
        t_max_bb=t_bb,
        xi_max_bb=xi_bb,
        blackbody_dominates=bool(bb_dominates),
        cryo_threshold=ff.cryo_threshold,
    )
    if bb_dominates:
        logger.warning("blackbody Lambda %.3g exceeds gas Lambda %.3g at the required pressure", bb, lambda_gas_required)
    logger.info(
        "free fall: t_max=%.3g s xi_max=%.3g m Gamma_sat=%.3g 1/s tau=%.3g s p_req=%.3g mbar",
        t_max,
        xi_max,
        gamma_sat,
        tau,
        required_pressure / MBAR_TO_PA,
    )
    return report

