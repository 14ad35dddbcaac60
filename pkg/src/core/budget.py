"""
Heating and noise budget of the trapped particle.

Rates are phonon heating rates in 1/s (the quoted "/2pi" numbers are these divided by 2pi).
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Union

from core.cavity import intracavity_photons
from core.constants import EPS0, EPSTEIN_PREFACTOR, HBAR, K_B, TWO_PI
from core.cooling import cooperativity
from core.errors import DomainError, require_non_negative, require_positive
from core.physpar import thermal_occupation

if TYPE_CHECKING:
    from core.config import ExperimentConfig, ParticleSpec, TrapSpec

logger = logging.getLogger(__name__)

AXES = ("x", "y", "z")


def _axis_index(axis: Union[str, int]) -> int:
    if isinstance(axis, str):
        if axis not in AXES:
            raise DomainError(f"axis must be one of {AXES}, got {axis!r}")
        return AXES.index(axis)
    if axis not in (0, 1, 2):
        raise DomainError(f"axis index must be 0, 1 or 2, got {axis!r}")
    return int(axis)


def mean_gas_speed(T: float, m_gas: float) -> float:
    require_positive(T=T, m_gas=m_gas)
    return math.sqrt(8.0 * K_B * T / (math.pi * m_gas))


def gas_heating(
    pressure: float, T: float, m_gas: float, radius: float, mass: float, omega: float
) -> tuple[float, float]:
    """Epstein drag gamma_gas and the matching heating Gamma_gas = gamma_gas k_B T / (hbar Omega)."""
    require_positive(pressure=pressure, T=T, m_gas=m_gas, radius=radius, mass=mass, omega=omega)
    gamma_gas = EPSTEIN_PREFACTOR * radius**2 * pressure / (mass * mean_gas_speed(T, m_gas))
    return gamma_gas, gamma_gas * thermal_occupation(T, omega)


def polarizability(volume: float, eps: float) -> float:
    # Clausius-Mossotti, SI (C m^2 / V)
    return 3.0 * volume * EPS0 * (eps - 1.0) / (eps + 2.0)


def scattered_power(trap: "TrapSpec", particle: "ParticleSpec") -> float:
    """Rayleigh-scattered tweezer power I0 sigma_sc."""
    alpha = polarizability(particle.volume, particle.refractive_eps)
    k = trap.wavenumber
    sigma_sc = k**4 * alpha**2 / (6.0 * math.pi * EPS0**2)
    intensity = 2.0 * trap.power / (math.pi * trap.waist_x * trap.waist_y)
    return intensity * sigma_sc


def recoil_heating(trap: "TrapSpec", particle: "ParticleSpec", axis: Union[str, int] = "x") -> float:
    i = _axis_index(axis)
    photon_rate = scattered_power(trap, particle) / (HBAR * trap.omega_tw)
    omega = trap.omega_mech[i]
    return photon_rate * (HBAR * trap.wavenumber) ** 2 * trap.recoil_factors[i] / (2.0 * particle.mass * HBAR * omega)


def phase_noise_phonons(n_phot: float, kappa: float, S_phidot: float) -> float:
    """Phonons added by classical laser phase noise, (n_phot / kappa) S_phidot(Omega)."""
    require_non_negative(n_phot=n_phot, S_phidot=S_phidot)
    require_positive(kappa=kappa)
    return n_phot / kappa * S_phidot


def intensity_noise_damping(nu_mech: float, S_RIN_at_2nu: float) -> float:
    """Parametric (negative) damping -pi^2 nu^2 S_RIN(2 nu); nu in ordinary Hz."""
    require_non_negative(nu_mech=nu_mech, S_RIN_at_2nu=S_RIN_at_2nu)
    return -(math.pi**2) * nu_mech**2 * S_RIN_at_2nu


@dataclass(frozen=True)
class BudgetItem:
    value: float
    unit: str
    provenance: str  # computed | measured | pass-through


@dataclass(frozen=True)
class HeatingBudget:
    Gamma_gas: float
    Gamma_rec: float
    Gamma_phase: float
    gamma_int: tuple[float, float, float]
    n_phase: float
    n_int: float
    c_pp: float
    c_qq: float
    Gamma_total: float
    cooperativity: float
    T_trap: float
    N_osc: float
    Gamma_gas_epstein: float = float("nan")
    gas_provenance: str = "computed"

    def as_report(self) -> dict[str, dict]:
        hz = lambda v: v / TWO_PI  # noqa: E731
        items = {
            "Gamma_gas": BudgetItem(hz(self.Gamma_gas), "Hz (/2pi)", self.gas_provenance),
            "Gamma_gas_epstein": BudgetItem(hz(self.Gamma_gas_epstein), "Hz (/2pi)", "computed"),
            "Gamma_rec": BudgetItem(hz(self.Gamma_rec), "Hz (/2pi)", "computed"),
            "Gamma_phase": BudgetItem(hz(self.Gamma_phase), "Hz (/2pi)", "pass-through"),
            "Gamma_total": BudgetItem(hz(self.Gamma_total), "Hz (/2pi)", "computed"),
            "gamma_int_x": BudgetItem(hz(self.gamma_int[0]), "Hz (/2pi)", "computed"),
            "gamma_int_y": BudgetItem(hz(self.gamma_int[1]), "Hz (/2pi)", "computed"),
            "gamma_int_z": BudgetItem(hz(self.gamma_int[2]), "Hz (/2pi)", "computed"),
            "n_phase": BudgetItem(self.n_phase, "phonons", "computed"),
            "n_int": BudgetItem(self.n_int, "phonons", "pass-through"),
            "c_pp": BudgetItem(self.c_pp, "shot-noise units", "pass-through"),
            "c_qq": BudgetItem(self.c_qq, "shot-noise units", "pass-through"),
            "cooperativity": BudgetItem(self.cooperativity, "1", "computed"),
            "T_trap": BudgetItem(self.T_trap, "s", "computed"),
            "N_osc": BudgetItem(self.N_osc, "rad (Omega_x / Gamma_total)", "computed"),
        }
        return {k: asdict(v) for k, v in items.items()}


def aggregate(Gamma_gas: float, Gamma_rec: float, Gamma_phase: float = 0.0) -> float:
    return Gamma_gas + Gamma_rec + Gamma_phase


def _gas_for(config: "ExperimentConfig", pressure: float, omega: float) -> tuple[float, float, str]:
    env, particle = config.environment, config.particle
    _, epstein = gas_heating(pressure, env.temperature, env.gas_molecule_mass, particle.radius, particle.mass, omega)
    if env.gas_heating_rate is not None:
        # measured at the config pressure and x frequency; n_th scales as 1/Omega
        used = env.gas_heating_rate * (pressure / env.pressure) * (config.trap.omega_x / omega)
        return used, epstein, "measured"
    return epstein, epstein, "computed"


def axis_heating(config: "ExperimentConfig", axis: Union[str, int], pressure: float | None = None) -> dict[str, float]:
    """Gas + recoil heating for one axis (the y/z values are estimates)."""
    i = _axis_index(axis)
    p = config.environment.pressure if pressure is None else pressure
    omega = config.trap.omega_mech[i]
    gas, _, _ = _gas_for(config, p, omega)
    rec = recoil_heating(config.trap, config.particle, i)
    return {"axis": AXES[i], "Gamma_gas": gas, "Gamma_rec": rec, "Gamma_total": gas + rec}


def total_budget(
    config: "ExperimentConfig", include_phase: bool = True, *, pressure: float | None = None
) -> HeatingBudget:
    trap, cav, drive = config.trap, config.cavity, config.drive
    p = config.environment.pressure if pressure is None else pressure

    gas, epstein, provenance = _gas_for(config, p, trap.omega_x)
    rec = recoil_heating(trap, config.particle, "x")
    phase = drive.phase_heating_rate if include_phase else 0.0
    total = aggregate(gas, rec, phase)

    n_phot = float(
        intracavity_photons(drive.drive_amplitude, cav.kappa, drive.detuning, config.particle_position, trap.wavenumber)
    )
    n_phase = phase_noise_phonons(n_phot, cav.kappa, drive.phase_noise_psd)
    if n_phase > 0.025:
        logger.warning("phase-noise phonons %.3g above 0.025; particle far from the node?", n_phase)

    gamma_int = tuple(
        intensity_noise_damping(w / TWO_PI, drive.rin_psd(2.0 * w)) for w in trap.omega_mech
    )

    budget = HeatingBudget(
        Gamma_gas=gas,
        Gamma_rec=rec,
        Gamma_phase=phase,
        gamma_int=gamma_int,
        n_phase=n_phase,
        n_int=drive.n_int,
        c_pp=drive.c_pp,
        c_qq=drive.c_qq,
        Gamma_total=total,
        cooperativity=cooperativity(drive.coupling_x, cav.kappa, total),
        T_trap=1.0 / total,
        N_osc=trap.omega_x / total,
        Gamma_gas_epstein=epstein,
        gas_provenance=provenance,
    )
    logger.info(
        "budget: Gamma/2pi gas=%.3g rec=%.3g phase=%.3g total=%.3g Hz, C=%.3g",
        gas / TWO_PI,
        rec / TWO_PI,
        phase / TWO_PI,
        total / TWO_PI,
        budget.cooperativity,
    )
    return budget
