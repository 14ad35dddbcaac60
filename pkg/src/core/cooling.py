"""
Steady-state cooling theory.

Two predictors live here: the sideband rate equations (fast, weak coupling) and the
linearised quantum Langevin model solved through its Lyapunov equation (authoritative,
valid into the strong-coupling regime). State order of the linear model is (q, p, X, Y):
mechanical quadratures with <q^2> = n + 1/2 in the ground state, then cavity quadratures.
"""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.linalg import solve_continuous_lyapunov

from core.constants import LYAPUNOV_RTOL, MBAR_TO_PA, TWO_PI, ULTIMATE_PRESSURE_MBAR
from core.errors import DomainError, InstabilityError, SolverError, require_non_negative, require_positive
from core.physpar import thermal_occupation, zero_point_fluctuation

if TYPE_CHECKING:
    from core.config import ExperimentConfig

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# rate equations


def scattering_rates(g: float, kappa: float, delta: float, omega: float) -> tuple[float, float]:
    """Anti-Stokes (cooling) and Stokes (heating) rates A-, A+ = g^2 kappa / ((kappa/2)^2 + (delta -+ omega)^2)."""
    require_positive(kappa=kappa, omega=omega)
    require_non_negative(g=g)
    hk2 = (kappa / 2.0) ** 2
    a_minus = g**2 * kappa / (hk2 + (delta - omega) ** 2)
    a_plus = g**2 * kappa / (hk2 + (delta + omega) ** 2)
    return a_minus, a_plus


def backaction_limit(kappa: float, omega: float) -> float:
    require_positive(kappa=kappa, omega=omega)
    return (kappa / (4.0 * omega)) ** 2


def cooperativity(g: float, kappa: float, Gamma: float) -> float:
    require_positive(kappa=kappa, Gamma=Gamma)
    return 4.0 * g**2 / (kappa * Gamma)


def predict_occupation(Gamma_heat: float, g: float, kappa: float, delta: float, omega: float) -> float:
    """Detailed balance n = (Gamma_heat + A+) / (A- - A+)."""
    require_non_negative(Gamma_heat=Gamma_heat)
    a_minus, a_plus = scattering_rates(g, kappa, delta, omega)
    gamma_opt = a_minus - a_plus
    if gamma_opt <= 0:
        raise InstabilityError(
            f"no optical damping at delta/2pi={delta / TWO_PI:.4g} Hz (gamma_opt/2pi={gamma_opt / TWO_PI:.4g} Hz)"
        )
    return (Gamma_heat + a_plus) / gamma_opt


@dataclass(frozen=True)
class CoolingPoint:
    delta: float
    gamma_opt: float
    A_minus: float
    A_plus: float
    n_min: float
    n_pred: float


def rate_cooling_point(Gamma_heat: float, g: float, kappa: float, delta: float, omega: float) -> CoolingPoint:
    a_minus, a_plus = scattering_rates(g, kappa, delta, omega)
    return CoolingPoint(
        delta=delta,
        gamma_opt=a_minus - a_plus,
        A_minus=a_minus,
        A_plus=a_plus,
        n_min=backaction_limit(kappa, omega),
        n_pred=predict_occupation(Gamma_heat, g, kappa, delta, omega),
    )


# ---------------------------------------------------------------------------
# linear model


@dataclass(frozen=True)
class LinearModel:
    """
    dx = A x dt + B dw,  <dw dw^T> = Q dt,  w = (thermal force, X_in, Y_in).

    Output quadratures (X_out, Y_out) = sqrt(kappa) (X, Y) - (X_in, Y_in).
    """

    omega: float
    kappa: float
    delta: float
    g: float
    gamma_m: float
    n_th: float
    Gamma_extra: float = 0.0
    x_zpf: float = 1.0

    def __post_init__(self) -> None:
        require_positive(omega=self.omega, kappa=self.kappa)
        require_non_negative(g=self.g, gamma_m=self.gamma_m, n_th=self.n_th, Gamma_extra=self.Gamma_extra)

    @property
    def drift(self) -> np.ndarray:
        W, k, d, g, gm = self.omega, self.kappa, self.delta, self.g, self.gamma_m
        return np.array(
            [
                [0.0, W, 0.0, 0.0],
                [-W, -gm, -2.0 * g, 0.0],
                [0.0, 0.0, -k / 2.0, d],
                [-2.0 * g, 0.0, -d, -k / 2.0],
            ]
        )

    @property
    def force_diffusion(self) -> float:
        # gas bath plus white extra heating; dn/dt = D_pp / 2
        return self.gamma_m * (2.0 * self.n_th + 1.0) + 2.0 * self.Gamma_extra

    @property
    def noise_input(self) -> np.ndarray:
        sk = np.sqrt(self.kappa)
        return np.array(
            [
                [0.0, 0.0, 0.0],
                [np.sqrt(self.force_diffusion), 0.0, 0.0],
                [0.0, sk, 0.0],
                [0.0, 0.0, sk],
            ]
        )

    @property
    def noise_cov(self) -> np.ndarray:
        return np.diag([1.0, 0.5, 0.5])

    @property
    def diffusion(self) -> np.ndarray:
        B = self.noise_input
        return B @ self.noise_cov @ B.T

    @property
    def output_state(self) -> np.ndarray:
        return np.sqrt(self.kappa) * np.array([[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])

    @property
    def output_feedthrough(self) -> np.ndarray:
        return -np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.drift)

    @property
    def is_stable(self) -> bool:
        return bool(np.all(self.eigenvalues.real < 0))

    @property
    def mechanical_eigenvalue(self) -> complex:
        # least damped of the upper-half-plane pair
        ev = self.eigenvalues
        upper = ev[ev.imag >= 0]
        return complex(upper[np.argmax(upper.real)])

    def quiet(self) -> "LinearModel":
        """Same dynamics without any noise source (deterministic limit)."""
        return _QuietLinearModel(**{f: getattr(self, f) for f in self.__dataclass_fields__})

    def digest(self) -> str:
        payload = np.array(
            [self.omega, self.kappa, self.delta, self.g, self.gamma_m, self.n_th, self.Gamma_extra, self.x_zpf]
        )
        return hashlib.sha256(payload.tobytes() + type(self).__name__.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class _QuietLinearModel(LinearModel):
    @property
    def noise_cov(self) -> np.ndarray:
        return np.zeros((3, 3))


def build_linear_model(
    config: "ExperimentConfig",
    pressure: Optional[float] = None,
    *,
    delta: Optional[float] = None,
    include_phase: bool = True,
) -> LinearModel:
    """x-motion model at a pressure (Pa); gas damping by Epstein, recoil and phase heating as extra diffusion."""
    from core.budget import gas_heating, recoil_heating

    env, particle, trap = config.environment, config.particle, config.trap
    p = env.pressure if pressure is None else pressure
    omega = trap.omega_x
    gamma_gas, _ = gas_heating(p, env.temperature, env.gas_molecule_mass, particle.radius, particle.mass, omega)
    extra = recoil_heating(trap, particle, "x")
    if include_phase:
        extra += config.drive.phase_heating_rate
    return LinearModel(
        omega=omega,
        kappa=config.cavity.kappa,
        delta=config.drive.detuning if delta is None else delta,
        g=config.drive.coupling_x,
        gamma_m=gamma_gas,
        n_th=thermal_occupation(env.temperature, omega),
        Gamma_extra=extra,
        x_zpf=zero_point_fluctuation(particle.mass, omega),
    )


def occupation_from_covariance(V: np.ndarray) -> float:
    return 0.5 * (V[0, 0] + V[1, 1] - 1.0)


def lyapunov_residual(A: np.ndarray, V: np.ndarray, D: np.ndarray) -> float:
    """|A V + V A^T + D| relative to |D|; absolute when D vanishes."""
    r = float(np.linalg.norm(A @ V + V @ A.T + D))
    scale = float(np.linalg.norm(D))
    return r / scale if scale > 0 else r


def steady_state_covariance(model: LinearModel) -> tuple[np.ndarray, float]:
    """Solve A V + V A^T + D = 0; returns (V, n_x)."""
    A = model.drift
    ev = np.linalg.eigvals(A)
    if np.any(ev.real >= 0):
        raise InstabilityError("drift matrix is not Hurwitz", eigenvalues=ev)
    D = model.diffusion
    V = solve_continuous_lyapunov(A, -D)
    V = 0.5 * (V + V.T)
    residual = lyapunov_residual(A, V, D)
    logger.debug("lyapunov residual %.3g, eigenvalues %s", residual, ev)
    if residual > LYAPUNOV_RTOL:
        raise SolverError(f"lyapunov residual {residual:.3g} exceeds {LYAPUNOV_RTOL:g}", residual=residual)
    return V, occupation_from_covariance(V)


# ---------------------------------------------------------------------------
# detuning sweep


def _sweep_point(models: Sequence[LinearModel]) -> tuple[list[float], bool]:
    out, stable = [], True
    for m in models:
        try:
            _, n = steady_state_covariance(m)
        except InstabilityError:
            n, stable = float("nan"), False
        out.append(n)
    return out, stable


def detuning_sweep(
    config: "ExperimentConfig",
    delta_grid,
    pressure_range: Optional[tuple[float, float]] = None,
    *,
    ultimate_pressure: float = ULTIMATE_PRESSURE_MBAR * MBAR_TO_PA,
    workers: int = 1,
) -> pd.DataFrame:
    """
    Lyapunov occupation band over detuning for the two pressure extremes (Pa) plus the
    ultimate curve where gas heating no longer matters.

    Unstable points are kept as NaN rows with stable_flag False.
    """
    grid = np.atleast_1d(np.asarray(delta_grid, dtype=float))
    if grid.size == 0:
        raise DomainError("delta grid is empty")
    if pressure_range is None:
        pressure_range = config.environment.pressure_range or (config.environment.pressure,) * 2
    p_lo, p_hi = pressure_range
    if not (0 < p_lo <= p_hi):
        raise DomainError(f"pressure range must satisfy 0 < low <= high, got {pressure_range}")

    bases = [build_linear_model(config, p) for p in (p_lo, p_hi, ultimate_pressure)]
    jobs = [[replace(b, delta=float(d)) for b in bases] for d in grid]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]

    rows = []
    for d, (ns, stable) in zip(grid, results):
        # more gas never cools, so the high-pressure curve is the upper edge
        rows.append(
            {
                "delta_hz": d / TWO_PI,
                "n_low": ns[0],
                "n_high": ns[1],
                "n_ultimate": ns[2],
                "stable_flag": stable,
            }
        )
    df = pd.DataFrame(rows)
    n_bad = int((~df["stable_flag"]).sum())
    if n_bad:
        logger.warning("%d of %d sweep points unstable", n_bad, len(df))
    logger.info("sweep: %d detunings, pressures %.3g..%.3g Pa", len(df), p_lo, p_hi)
    return df
