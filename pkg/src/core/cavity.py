"""
Cavity helpers: Lorentzian response, transmission-scan linewidth fits, detuning from
classical-noise asymmetry, intracavity photon number and node-distance calibration.

All frequencies are angular (rad/s). The signed offset omega is measured from the tweezer
laser; the cavity resonance sits at +delta.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from core.constants import C_LIGHT, DETUNING_GOOD_SIGMA_HZ, PEAK_SNR_MIN, TWO_PI
from core.errors import CalibrationError, DomainError, FitError, require_positive

if TYPE_CHECKING:
    from core.specgen import PsdTrace

logger = logging.getLogger(__name__)


def cavity_response(kappa: float, delta: float, omega):
    """T = (kappa/2)^2 / ((kappa/2)^2 + (delta - omega)^2), vectorised over omega (and delta)."""
    require_positive(kappa=kappa)
    hk2 = (kappa / 2.0) ** 2
    return hk2 / (hk2 + (np.asarray(delta) - np.asarray(omega)) ** 2)


def asymmetry_ratio(kappa: float, delta: float, omega):
    """Classical-noise ratio S(omega)/S(-omega) of a cavity-filtered floor."""
    require_positive(kappa=kappa)
    hk2 = (kappa / 2.0) ** 2
    omega = np.asarray(omega)
    return (hk2 + (omega + delta) ** 2) / (hk2 + (omega - delta) ** 2)


def cavity_length(fsr: float) -> float:
    # angular FSR convention
    require_positive(fsr=fsr)
    return C_LIGHT * math.pi / fsr


def finesse(fsr: float, kappa: float) -> float:
    require_positive(fsr=fsr, kappa=kappa)
    return fsr / kappa


# ---------------------------------------------------------------------------
# transmission scans


@dataclass(frozen=True)
class TransmissionScan:
    detuning_grid: np.ndarray
    transmitted_power: np.ndarray
    scan_id: str = "scan"
    fsr: Optional[float] = None

    def __post_init__(self) -> None:
        grid = np.asarray(self.detuning_grid, dtype=float)
        power = np.asarray(self.transmitted_power, dtype=float)
        if grid.shape != power.shape or grid.ndim != 1:
            raise DomainError(f"{self.scan_id}: grid and power must be 1-D arrays of equal length")
        if grid.size < 5:
            raise DomainError(f"{self.scan_id}: need at least 5 points")
        if not np.all(np.diff(grid) > 0):
            raise DomainError(f"{self.scan_id}: detuning grid must be strictly increasing")
        if np.any(power < 0):
            raise DomainError(f"{self.scan_id}: transmitted power must be non-negative")
        object.__setattr__(self, "detuning_grid", grid)
        object.__setattr__(self, "transmitted_power", power)


@dataclass(frozen=True)
class LinewidthFit:
    kappa: float
    sigma: float
    fsr: Optional[float]
    per_scan: np.ndarray = field(repr=False)
    scan_ids: tuple[str, ...] = ()

    @property
    def finesse(self) -> Optional[float]:
        return None if self.fsr is None else finesse(self.fsr, self.kappa)


def _scan_model(params: np.ndarray, grid: np.ndarray) -> np.ndarray:
    amp, center, kappa, offset = params
    return amp * cavity_response(kappa, center, grid) + offset


def _fit_single_scan(scan: TransmissionScan) -> tuple[float, float]:
    grid, power = scan.detuning_grid, scan.transmitted_power

    i_peak = int(np.argmax(power))
    offset0 = float(np.min(power))
    amp0 = float(power[i_peak] - offset0)
    if amp0 <= 0:
        raise FitError(f"{scan.scan_id}: flat scan, no peak", scan_id=scan.scan_id)
    above = grid[power - offset0 >= 0.5 * amp0]
    spacing = float(np.median(np.diff(grid)))
    kappa0 = max(float(above[-1] - above[0]), 3.0 * spacing)

    x0 = np.array([amp0, grid[i_peak], kappa0, offset0])
    lower = [0.0, grid[0], spacing, -np.inf]
    upper = [np.inf, grid[-1], grid[-1] - grid[0], np.inf]
    res = least_squares(
        lambda p: _scan_model(p, grid) - power,
        x0,
        bounds=(lower, upper),
        x_scale="jac",
        xtol=1e-12,
        ftol=1e-12,
        gtol=1e-12,
        max_nfev=2000,
    )
    resid = res.fun
    if not res.success:
        raise FitError(
            f"{scan.scan_id}: linewidth fit did not converge ({res.message})",
            scan_id=scan.scan_id,
            residual=float(np.sqrt(np.mean(resid**2))),
        )

    amp, _, kappa, _ = res.x
    noise = float(np.std(resid))
    total = float(np.sum((power - power.mean()) ** 2))
    explained = 1.0 - float(np.sum(resid**2)) / total if total > 0 else 0.0
    snr = amp / noise if noise > 0 else np.inf
    logger.debug("%s: kappa=%.6g snr=%.3g explained=%.3f nfev=%d", scan.scan_id, kappa, snr, explained, res.nfev)

    # a noise spike can beat 3 sigma; a peak must also explain the scan
    if snr < PEAK_SNR_MIN or explained < 0.5:
        raise FitError(
            f"{scan.scan_id}: no resolvable peak (snr={snr:.2f}, explained={explained:.2f})",
            scan_id=scan.scan_id,
            residual=noise,
        )

    hess = res.jac.T @ res.jac
    dof = max(grid.size - 4, 1)
    cov = np.linalg.pinv(hess) * float(np.sum(resid**2)) / dof
    return float(kappa), float(np.sqrt(max(cov[2, 2], 0.0)))


def fit_linewidth(scans: Sequence[TransmissionScan]) -> LinewidthFit:
    """Fit each scan to a*T + offset; kappa is the scan mean with its standard error."""
    if not scans:
        raise DomainError("fit_linewidth needs at least one scan")

    kappas, errs = [], []
    for scan in scans:
        k, s = _fit_single_scan(scan)
        kappas.append(k)
        errs.append(s)
    kappas_arr = np.asarray(kappas)

    if kappas_arr.size > 1:
        sigma = float(np.std(kappas_arr, ddof=1) / np.sqrt(kappas_arr.size))
    else:
        sigma = errs[0]

    fsrs = [s.fsr for s in scans if s.fsr is not None]
    fsr = float(np.mean(fsrs)) if fsrs else None

    out = LinewidthFit(
        kappa=float(kappas_arr.mean()),
        sigma=sigma,
        fsr=fsr,
        per_scan=kappas_arr,
        scan_ids=tuple(s.scan_id for s in scans),
    )
    logger.info("kappa/2pi = %.4g +- %.2g Hz from %d scans", out.kappa / TWO_PI, out.sigma / TWO_PI, len(scans))
    return out


def synthesize_scans(
    kappa: float,
    n_scans: int,
    rng: np.random.Generator,
    *,
    noise: float = 0.02,
    kappa_spread: float = 0.0,
    span: float | None = None,
    n_points: int = 801,
    offset: float = 0.0,
    fsr: float | None = None,
) -> list[TransmissionScan]:
    """Normalised transmission scans with multiplicative noise; kappa_spread is scan-to-scan drift (rad/s)."""
    require_positive(kappa=kappa)
    span = 10.0 * kappa if span is None else span
    grid = np.linspace(-span / 2.0, span / 2.0, n_points)
    scans = []
    for i in range(n_scans):
        k_i = kappa + kappa_spread * rng.standard_normal() if kappa_spread else kappa
        clean = cavity_response(k_i, 0.0, grid)
        power = clean * (1.0 + noise * rng.standard_normal(grid.size)) + offset
        scans.append(TransmissionScan(grid, np.clip(power, 0.0, None), scan_id=f"scan_{i:03d}", fsr=fsr))
    return scans


# ---------------------------------------------------------------------------
# detuning


@dataclass(frozen=True)
class DetuningEstimate:
    delta: float
    sigma: float
    good: bool
    low_confidence: bool
    n_bins: int


def _paired_excess(psd: "PsdTrace", band: tuple[float, float]):
    lo, hi = band
    freq, values = psd.freq, psd.psd
    pos = (freq >= lo) & (freq <= hi)
    w = freq[pos]
    neg_freq = -freq[::-1]
    neg_vals = values[::-1]
    if w.size == 0 or neg_freq[0] > w.min() or neg_freq[-1] < w.max():
        raise DomainError("psd does not cover +-band around the carrier")
    s_pos = values[pos]
    s_neg = np.interp(w, neg_freq, neg_vals)
    return w, s_pos - 1.0, s_neg - 1.0, s_pos, s_neg


def estimate_detuning(psd: "PsdTrace", band: tuple[float, float], kappa: float) -> DetuningEstimate:
    """
    Weighted fit of the floor asymmetry S(w)/S(-w) for the detuning.

    The shot floor (1 in shot-noise units) is removed first; bins whose excess is not positive
    on both sides carry no information and are dropped.
    """
    require_positive(kappa=kappa)
    w, e_pos, e_neg, s_pos, s_neg = _paired_excess(psd, band)
    n_avg = psd.n_avg or 1

    keep = (e_pos > 0) & (e_neg > 0)
    if keep.sum() < 3:
        logger.warning("no classical excess in band, detuning unresolved")
        return DetuningEstimate(0.0, np.inf, False, True, int(keep.sum()))

    w, e_pos, e_neg, s_pos, s_neg = w[keep], e_pos[keep], e_neg[keep], s_pos[keep], s_neg[keep]
    log_ratio = np.log(e_pos / e_neg)
    sigma = np.sqrt((s_pos / e_pos) ** 2 + (s_neg / e_neg) ** 2) / np.sqrt(n_avg)

    def resid(p):
        return (log_ratio - np.log(asymmetry_ratio(kappa, p[0], w))) / sigma

    # the model is odd in delta, so a coarse scan picks the branch first
    coarse = np.linspace(-2.0 * band[1], 2.0 * band[1], 401)
    chi2 = [float(np.sum(resid([d]) ** 2)) for d in coarse]
    d0 = coarse[int(np.argmin(chi2))]

    res = least_squares(resid, [d0], x_scale=[kappa])
    delta = float(res.x[0])
    hess = float(res.jac[:, 0] @ res.jac[:, 0])
    dof = max(w.size - 1, 1)
    chi2_red = float(np.sum(res.fun**2)) / dof
    sig = float(np.sqrt(max(chi2_red, 1.0) / hess)) if hess > 0 else np.inf

    low_conf = not (abs(delta) > 2.0 * sig)
    good = (sig <= TWO_PI * DETUNING_GOOD_SIGMA_HZ) and not low_conf
    if low_conf:
        logger.warning("floor asymmetry consistent with zero detuning (delta/2pi=%.3g Hz)", delta / TWO_PI)
    logger.info("delta/2pi = %.4g +- %.2g Hz (%d bins)", delta / TWO_PI, sig / TWO_PI, w.size)
    return DetuningEstimate(delta, sig, good, low_conf, int(w.size))


def synthesize_classical_noise(
    kappa: float,
    delta: float,
    grid: np.ndarray,
    *,
    level: float,
    n_avg: int,
    rng: np.random.Generator,
) -> "PsdTrace":
    """Shot floor plus cavity-filtered classical noise of the given level, averaged-periodogram noise."""
    from core.specgen import PsdTrace, gamma_noise

    grid = np.asarray(grid, dtype=float)
    clean = 1.0 + level * cavity_response(kappa, delta, grid)
    spacing = float(np.median(np.diff(grid)))
    return PsdTrace(grid, clean * gamma_noise(grid.size, n_avg, rng), n_avg=n_avg, resolution_bw=spacing)


# ---------------------------------------------------------------------------
# photons and position


def intracavity_photons(E_d: float, kappa: float, delta: float, x0, k: float):
    """n_phot = E_d^2 cos^2(k x0) / ((kappa/2)^2 + delta^2)."""
    require_positive(kappa=kappa)
    return E_d**2 * np.cos(k * np.asarray(x0)) ** 2 / ((kappa / 2.0) ** 2 + delta**2)


@dataclass(frozen=True)
class PositionTrace:
    time: np.ndarray
    photon_number_normalized: np.ndarray
    inferred_offset_from_node: np.ndarray

    @property
    def max_offset(self) -> float:
        return float(np.max(self.inferred_offset_from_node))


def node_offset_to_photons(offset, wavelength: float):
    """Normalised photon number sin^2(k d) for a distance d from the node."""
    k = TWO_PI / wavelength
    return np.sin(k * np.asarray(offset)) ** 2


def calibrate_position(
    carrier_peak_heights,
    antinode_reference: float,
    wavelength: float,
    time=None,
) -> PositionTrace:
    """
    Distance to the nearest node from carrier heights.

    Inverts h = cos^2(k x0) = sin^2(k d) on the principal branch d = arcsin(sqrt(h))/k, d in [0, lambda/4].
    """
    require_positive(antinode_reference=antinode_reference, wavelength=wavelength)
    heights = np.asarray(carrier_peak_heights, dtype=float)
    if np.any(heights < 0):
        raise CalibrationError("carrier heights must be non-negative")
    h = heights / antinode_reference
    if np.any(h > 1.0 + 1e-12):
        raise CalibrationError(
            f"carrier height {heights.max():.4g} above antinode reference {antinode_reference:.4g}"
        )
    h = np.clip(h, 0.0, 1.0)
    k = TWO_PI / wavelength
    offset = np.arcsin(np.sqrt(h)) / k
    t = np.arange(h.size, dtype=float) if time is None else np.asarray(time, dtype=float)
    return PositionTrace(t, h, offset)
