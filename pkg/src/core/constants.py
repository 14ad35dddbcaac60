"""
Project-wide constants (single source of truth).

Location: src/core/constants.py
Import pattern (from any file under src/): from core.constants import ...
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from scipy import constants as sc

# paths
REPO_ROOT: Path = Path(__file__).resolve().parents[2]
DATA_DIR: Path = REPO_ROOT / "data"
PAPER_DEFAULTS_PATH: Path = DATA_DIR / "paper_defaults.json"
PROCESSED_DIR: Path = DATA_DIR / "processed"

OUT_ENV_VAR: str = "LEVICOOL_OUT"


def default_out_dir() -> Path:
    # env var wins over the repo default
    override = os.environ.get(OUT_ENV_VAR)
    return Path(override) if override else PROCESSED_DIR


TOOLKIT_VERSION: str = "0.3.0"


# physical constants (CODATA via scipy)
HBAR: float = sc.hbar
H_PLANCK: float = sc.h
K_B: float = sc.k
C_LIGHT: float = sc.c
AMU: float = sc.atomic_mass
EPS0: float = sc.epsilon_0

TWO_PI: float = 2.0 * np.pi
MBAR_TO_PA: float = 100.0


# unit helpers at the I/O boundary
def hz_to_rad(f_hz):
    return TWO_PI * np.asarray(f_hz, dtype=float) if np.ndim(f_hz) else TWO_PI * float(f_hz)


def rad_to_hz(w):
    return np.asarray(w, dtype=float) / TWO_PI if np.ndim(w) else float(w) / TWO_PI


def mbar_to_pa(p_mbar: float) -> float:
    return float(p_mbar) * MBAR_TO_PA


def pa_to_mbar(p_pa: float) -> float:
    return float(p_pa) / MBAR_TO_PA


# defaults not printed in the source experiment
DEFAULT_DENSITY: float = 1850.0  # kg/m^3, reproduces m = 2.83 fg at d = 143 nm
DEFAULT_GAS_MASS_U: float = 28.0
ULTIMATE_PRESSURE_MBAR: float = 1e-8
CRYO_THRESHOLD_K: float = 130.0
# relative Lyapunov residual |A V + V A^T + D| / |D| accepted from the solver
LYAPUNOV_RTOL: float = 1e-10

# recoil direction factors (x: transverse to polarisation, y: along it, z: propagation)
RECOIL_DIRECTION_FACTORS: tuple[float, float, float] = (2.0 / 5.0, 1.0 / 5.0, 7.0 / 5.0)

# epstein drag prefactor for a sphere in free molecular flow (diffuse reflection)
EPSTEIN_PREFACTOR: float = 15.8

# worst-case integration band and shot-noise check bands (Hz, magnitude)
WORST_CASE_BAND_HZ: tuple[float, float] = (250e3, 300e3)
SHOT_NOISE_BAND_HZ: tuple[float, float] = (250e3, 350e3)

# LO powers of the shot-noise scan, as fractions of drive.lo_power
LO_POWER_FRACTIONS: tuple[float, ...] = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5)

# thresholds
PEAK_SNR_MIN: float = 3.0
AUTO_INIT_SIGMAS: float = 5.0
DETUNING_GOOD_SIGMA_HZ: float = 10e3
LINEAR_R2_MIN: float = 0.99


# published anchors (value, tolerance, kind) used by reproduce_paper
# kind: "rel" relative tolerance, "abs" absolute, "factor" multiplicative window, "max" upper bound
PAPER_ANCHORS: dict[str, tuple[float, float, str]] = {
    "n_min": (0.025, 0.0005, "abs"),
    "cooperativity": (5.0, 0.2, "abs"),
    "T_mode_uK": (12.2, 0.1, "abs"),
    "ground_prob": (0.70, 0.01, "abs"),
    "x_zpf_pm": (3.1, 0.02, "rel"),
    "lambda_th_pm": (19.0, 0.03, "rel"),
    "lambda_over_xzpf": (6.2, 0.2, "abs"),
    "t_max_us": (1.42, 0.03, "rel"),
    "xi_max_pm": (10.2, 0.03, "rel"),
    "Gamma_sat_MHz": (3.6, 0.15, "rel"),
    "tau_ms": (12.0, 0.10, "rel"),
    "required_rate_hz": (84.0, 0.05, "rel"),
    "required_pressure_mbar": (2e-11, 1.5, "factor"),
    "t_max_bb_ms": (0.55, 0.10, "rel"),
    "xi_max_bb_nm": (2.0, 2.5, "factor"),
}
