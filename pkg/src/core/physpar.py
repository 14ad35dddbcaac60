"""
Physical constants and single-value derived quantities of the levitated particle.

Everything here is a pure function of SI inputs with angular frequencies (rad/s).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from core.constants import AMU, C_LIGHT, EPS0, H_PLANCK, HBAR, K_B
from core.errors import DomainError, require_positive

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = HBAR
    h: float = H_PLANCK
    k_B: float = K_B
    c: float = C_LIGHT
    u: float = AMU
    eps0: float = EPS0

    def __post_init__(self) -> None:
        for name in ("hbar", "h", "k_B", "c", "u", "eps0"):
            if not getattr(self, name) > 0:
                raise DomainError(f"constant {name} must be > 0")
        if not math.isclose(self.h, 2.0 * math.pi * self.hbar, rel_tol=1e-12):
            raise DomainError("h must equal 2*pi*hbar")


CONSTANTS = PhysicalConstants()


def mass_from_diameter(diameter: float, density: float) -> float:
    require_positive(diameter=diameter, density=density)
    return density * (math.pi / 6.0) * diameter**3


def zero_point_fluctuation(mass: float, omega: float) -> float:
    """Ground-state position spread sqrt(hbar / 2 m Omega)."""
    require_positive(mass=mass, omega=omega)
    return math.sqrt(HBAR / (2.0 * mass * omega))


def zero_point_momentum(mass: float, omega: float) -> float:
    # p_zpf * x_zpf = hbar / 2
    return HBAR / (2.0 * zero_point_fluctuation(mass, omega))


def thermal_de_broglie(m_gas: float, T: float) -> float:
    """h / sqrt(2 pi m k_B T), the standard definition (19 pm for N2 at 300 K)."""
    require_positive(m_gas=m_gas, T=T)
    return H_PLANCK / math.sqrt(2.0 * math.pi * m_gas * K_B * T)


def thermal_occupation(T: float, omega: float) -> float:
    # high-temperature form k_B T / (hbar Omega)
    require_positive(T=T, omega=omega)
    return K_B * T / (HBAR * omega)


def occupation_temperature(n: float, omega: float) -> tuple[float, float]:
    """
    Mode temperature and ground-state probability of a thermal state with mean occupation n.

    Inverts the Bose formula n = 1 / (exp(hbar Omega / k_B T) - 1).
    Returns (T_mode [K], P0).
    """
    require_positive(omega=omega)
    if n < 0:
        raise DomainError(f"occupation must be >= 0, got {n!r}")
    if n == 0:
        return 0.0, 1.0
    T_mode = HBAR * omega / (K_B * math.log1p(1.0 / n))
    return T_mode, 1.0 / (1.0 + n)


def temperature_occupation(T: float, omega: float) -> float:
    """Bose occupation at temperature T, inverse of occupation_temperature."""
    require_positive(omega=omega)
    if T < 0:
        raise DomainError(f"temperature must be >= 0, got {T!r}")
    if T == 0:
        return 0.0
    return 1.0 / math.expm1(HBAR * omega / (K_B * T))


def gas_molecule_mass(mass_u: float) -> float:
    require_positive(gas_molecule_mass_u=mass_u)
    return mass_u * AMU
