"""
Sideband thermometry.

Fits Lorentzian sideband pairs to heterodyne spectra, turns amplitude (or band-area) ratios
into occupations after removing the cavity envelope, and carries the side checks: shot-noise
linearity, z temperature from harmonics and the heating/damping cross-check.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from core.cavity import cavity_response
from core.constants import (
    AUTO_INIT_SIGMAS,
    DETUNING_GOOD_SIGMA_HZ,
    HBAR,
    K_B,
    LINEAR_R2_MIN,
    LO_POWER_FRACTIONS,
    PEAK_SNR_MIN,
    SHOT_NOISE_BAND_HZ,
    TWO_PI,
    WORST_CASE_BAND_HZ,
)
from core.data import fingerprint
from core.errors import DomainError, FitError, UnphysicalAsymmetryError, require_positive
from core.specgen import (
    PsdTrace,
    config_grid,
    heterodyne_model,
    lo_power_series,
    lorentzian,
    spectrum_params_from_config,
)

logger = logging.getLogger(__name__)

METHODS = ("joint_fit", "masked_fit", "band_power", "worst_case", "rate_ratio")

X_PARAMS = ("a_S", "a_AS", "omega_x", "gamma_x")
Y_PARAMS = ("a_Sy", "a_ASy", "omega_y", "gamma_y")


@dataclass(frozen=True)
class SidebandFit:
    a_S: float
    a_AS: float
    omega_x: float
    gamma_x: float
    a_Sy: Optional[float] = None
    a_ASy: Optional[float] = None
    omega_y: Optional[float] = None
    gamma_y: Optional[float] = None
    covariance: Optional[np.ndarray] = field(default=None, repr=False)
    chi2_red: float = float("nan")
    peak_snr: float = float("inf")
    low_confidence: bool = False

    def __post_init__(self) -> None:
        if not self.gamma_x > 0:
            raise DomainError("gamma_x must be > 0")
        if self.a_S < 0 or self.a_AS < 0:
            raise DomainError("sideband amplitudes must be >= 0")

    @property
    def has_y(self) -> bool:
        return self.omega_y is not None

    @property
    def param_names(self) -> tuple[str, ...]:
        return X_PARAMS + (Y_PARAMS if self.has_y else ())

    @property
    def vector(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in self.param_names], dtype=float)

    def sigma(self, name: str) -> float:
        if self.covariance is None:
            return 0.0
        i = self.param_names.index(name)
        return float(np.sqrt(max(self.covariance[i, i], 0.0)))

    def cov(self, a: str, b: str) -> float:
        if self.covariance is None:
            return 0.0
        names = self.param_names
        return float(self.covariance[names.index(a), names.index(b)])

    def as_dict(self) -> dict:
        out = {n: getattr(self, n) for n in self.param_names}
        out.update(chi2_red=self.chi2_red, peak_snr=self.peak_snr, low_confidence=self.low_confidence)
        out.update({f"sigma_{n}": self.sigma(n) for n in self.param_names})
        return out


@dataclass(frozen=True)
class OccupationResult:
    n: float
    sigma_n: float
    method: str
    sigma_n_stat: float = 0.0
    inputs_hash: str = ""
    low_confidence: bool = False
    details: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}")
        if self.n < 0 or self.sigma_n < 0:
            raise DomainError("occupation and its uncertainty must be >= 0")

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "n": self.n,
            "sigma_n": self.sigma_n,
            "sigma_n_stat": self.sigma_n_stat,
            "inputs_hash": self.inputs_hash,
            "low_confidence": self.low_confidence,
            **self.details,
        }


# ---------------------------------------------------------------------------
# fitting


def sideband_model(params: np.ndarray, w: np.ndarray) -> np.ndarray:
    s = np.ones_like(w)
    for j in range(0, params.size, 4):
        a_s, a_as, om, gam = params[j : j + 4]
        s = s + a_s * lorentzian(w + om, gam) + a_as * lorentzian(w - om, gam)
    return s


def _smooth(values: np.ndarray, width: int) -> np.ndarray:
    width = max(int(width), 1)
    kernel = np.ones(width) / width
    return np.convolve(values, kernel, mode="same")


def _peak_guess(w: np.ndarray, excess: np.ndarray, i_peak: int) -> tuple[float, float]:
    height = excess[i_peak]
    half = height / 2.0
    lo = i_peak
    while lo > 0 and excess[lo] > half:
        lo -= 1
    hi = i_peak
    while hi < w.size - 1 and excess[hi] > half:
        hi += 1
    gamma = max(float(w[hi] - w[lo]), 3.0 * float(np.median(np.diff(w))))
    return float(w[i_peak]), gamma


def auto_init(psd: PsdTrace, band: tuple[float, float], include_y: bool = False) -> SidebandFit:
    """
    Peak search on the anti-Stokes side: the highest smoothed excess above AUTO_INIT_SIGMAS
    per-bin standard deviations; the Stokes amplitude is read at the mirrored frequency.
    With include_y a second peak outside the first one's width is taken and the higher
    frequency peak is assigned to x.
    """
    lo, hi = band
    sel = psd.select(lo, hi)
    w = psd.freq[sel]
    if w.size < 5:
        raise FitError("no bins in the sideband band")
    noise = 1.0 / np.sqrt(psd.n_avg or 1)
    excess = _smooth(psd.psd[sel] - 1.0, 9)

    def find(mask: np.ndarray) -> Optional[int]:
        cand = np.where(mask, excess, -np.inf)
        i = int(np.argmax(cand))
        if not np.isfinite(cand[i]) or cand[i] < AUTO_INIT_SIGMAS * noise:
            return None
        return i

    i1 = find(np.ones(w.size, dtype=bool))
    if i1 is None:
        raise FitError(f"no anti-Stokes peak above {AUTO_INIT_SIGMAS:g} sigma in band")
    peaks = [_peak_guess(w, excess, i1) + (excess[i1],)]

    if include_y:
        om1, g1, _ = peaks[0]
        i2 = find(np.abs(w - om1) > 3.0 * g1)
        if i2 is None:
            raise FitError("include_y requested but no second peak found")
        peaks.append(_peak_guess(w, excess, i2) + (excess[i2],))
        peaks.sort(key=lambda p: -p[0])

    def amplitudes(om: float, gam: float, height: float) -> tuple[float, float]:
        neg = psd.select(-om - gam / 4.0, -om + gam / 4.0)
        stokes = float(np.mean(psd.psd[neg]) - 1.0) if neg.any() else 0.0
        scale = gam / 2.0
        return max(stokes, 0.01 * height) * scale, height * scale

    om_x, g_x, h_x = peaks[0]
    a_s, a_as = amplitudes(om_x, g_x, h_x)
    kw = {}
    if include_y:
        om_y, g_y, h_y = peaks[1]
        a_sy, a_asy = amplitudes(om_y, g_y, h_y)
        kw = dict(a_Sy=a_sy, a_ASy=a_asy, omega_y=om_y, gamma_y=g_y)
    guess = SidebandFit(a_S=a_s, a_AS=a_as, omega_x=om_x, gamma_x=g_x, **kw)
    logger.debug("auto init: %s", guess.as_dict())
    return guess


def init_from_config(config, include_y: bool = False, n_guess: Optional[float] = None) -> SidebandFit:
    """Initial guess from the configured frequencies, linewidths and forward-model weights."""
    het, trap = config.heterodyne, config.trap
    w = config.sideband_weight_x
    kappa, delta = config.cavity.kappa, config.drive.detuning
    t_as = float(cavity_response(kappa, delta, trap.omega_x))
    t_s = float(cavity_response(kappa, delta, -trap.omega_x))
    n0 = n_guess if n_guess is not None else (config.free_fall.n_bar or 1.0)
    kw = {}
    if include_y:
        ty_as = float(cavity_response(kappa, delta, trap.omega_y))
        ty_s = float(cavity_response(kappa, delta, -trap.omega_y))
        kw = dict(
            a_Sy=het.weight_y * (het.n_y + 1) * ty_s,
            a_ASy=het.weight_y * het.n_y * ty_as,
            omega_y=trap.omega_y,
            gamma_y=het.gamma_y,
        )
    return SidebandFit(
        a_S=w * (n0 + 1) * t_s, a_AS=w * n0 * t_as, omega_x=trap.omega_x, gamma_x=het.gamma_x, **kw
    )


def _mask_bins(freq: np.ndarray, mask: Optional[Sequence[tuple[float, float]]]) -> np.ndarray:
    keep = np.ones(freq.size, dtype=bool)
    for lo, hi in mask or ():
        a = np.abs(freq)
        keep &= ~((a >= lo) & (a <= hi))
    return keep


def fit_sidebands(
    psd: PsdTrace,
    init: Optional[SidebandFit] = None,
    mask: Optional[Sequence[tuple[float, float]]] = None,
    *,
    band: Optional[tuple[float, float]] = None,
    include_y: Optional[bool] = None,
    max_nfev: int = 4000,
) -> SidebandFit:
    """
    Weighted least squares of shot floor + Lorentzian sideband pairs.

    Weights are S/sqrt(n_avg); a first pass uses the data, a second the first-pass model.
    mask intervals are in |omega| and remove bins on both sides of the carrier.
    """
    if band is None:
        a = np.abs(psd.freq)
        band = (float(a.min()), float(a.max()))
    if init is None:
        init = auto_init(psd, band, include_y=bool(include_y))
    if include_y is None:
        include_y = init.has_y
    if include_y and not init.has_y:
        raise DomainError("include_y needs y entries in the initial guess")

    sel = psd.select(-band[1], -band[0]) | psd.select(band[0], band[1])
    sel &= _mask_bins(psd.freq, mask)
    w, s = psd.freq[sel], psd.psd[sel]
    n_avg = psd.n_avg or 1

    names = X_PARAMS + (Y_PARAMS if include_y else ())
    x0 = np.array([getattr(init, n) for n in names], dtype=float)
    x0 = np.maximum(x0, 1e-12 * np.abs(x0).max())
    lower = np.zeros(x0.size)
    lower[2::4] = 1e-6 * x0[2::4]
    lower[3::4] = 1e-6 * x0[3::4]
    upper = np.full(x0.size, np.inf)

    res = None
    sigma = s / np.sqrt(n_avg)
    for _ in range(2):
        res = least_squares(
            lambda p: (s - sideband_model(p, w)) / sigma,
            x0,
            bounds=(lower, upper),
            x_scale="jac",
            xtol=1e-12,
            ftol=1e-12,
            gtol=1e-12,
            max_nfev=max_nfev,
        )
        if res.status <= 0:
            rms = float(np.sqrt(np.mean(res.fun**2)))
            raise FitError(f"sideband fit did not converge ({res.message})", residual=rms)
        x0 = res.x
        sigma = sideband_model(res.x, w) / np.sqrt(n_avg)

    dof = max(w.size - x0.size, 1)
    chi2_red = float(np.sum(res.fun**2)) / dof
    cov = np.linalg.pinv(res.jac.T @ res.jac)
    cov = 0.5 * (cov + cov.T)

    p = dict(zip(names, res.x))
    errs = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    with np.errstate(divide="ignore"):
        snr = np.where(errs[:2] > 0, res.x[:2] / errs[:2], np.inf)
    peak_snr = float(np.min(snr))
    low = peak_snr < PEAK_SNR_MIN
    if low:
        logger.warning("weak sideband: peak snr %.2f below %.0f", peak_snr, PEAK_SNR_MIN)
    logger.info(
        "sideband fit: a_AS/a_S=%.4g, omega/2pi=%.5g Hz, gamma/2pi=%.4g Hz, chi2_red=%.3f",
        p["a_AS"] / p["a_S"] if p["a_S"] > 0 else np.inf,
        p["omega_x"] / TWO_PI,
        p["gamma_x"] / TWO_PI,
        chi2_red,
    )
    return SidebandFit(**p, covariance=cov, chi2_red=chi2_red, peak_snr=peak_snr, low_confidence=low)


# ---------------------------------------------------------------------------
# occupation from asymmetry


def _log_envelope_gradient(kappa: float, delta: float, omega: float) -> tuple[float, float, float]:
    """d/d(kappa, delta, omega) of ln[T(delta,-omega) / T(delta,omega)]."""
    hk2 = (kappa / 2.0) ** 2
    d_m = hk2 + (delta - omega) ** 2
    d_p = hk2 + (delta + omega) ** 2
    dk = (kappa / 2.0) / d_m - (kappa / 2.0) / d_p
    dd = 2.0 * (delta - omega) / d_m - 2.0 * (delta + omega) / d_p
    dw = -2.0 * (delta - omega) / d_m - 2.0 * (delta + omega) / d_p
    return dk, dd, dw


def invert_ratio(r: float, kappa: float, delta: float, omega: float) -> float:
    """n from r = [n/(n+1)] T(delta,omega)/T(delta,-omega)."""
    envelope = float(cavity_response(kappa, delta, omega) / cavity_response(kappa, delta, -omega))
    rc = r / envelope
    if rc >= 1.0:
        raise UnphysicalAsymmetryError(
            f"corrected sideband ratio {rc:.4g} >= 1; check kappa and delta (raw ratio {r:.4g})"
        )
    return rc / (1.0 - rc)


def occupation_from_asymmetry(
    fit: SidebandFit,
    kappa: float,
    delta: float,
    *,
    kappa_sigma: float = 0.0,
    delta_sigma: float = TWO_PI * DETUNING_GOOD_SIGMA_HZ,
    method: str = "joint_fit",
) -> OccupationResult:
    require_positive(kappa=kappa)
    if not fit.a_S > 0:
        raise DomainError("Stokes amplitude must be > 0")
    om = fit.omega_x
    rho = float(cavity_response(kappa, delta, -om) / cavity_response(kappa, delta, om))
    n = invert_ratio(fit.a_AS / fit.a_S, kappa, delta, om)
    rc = fit.a_AS / fit.a_S * rho
    g = 1.0 / (1.0 - rc) ** 2

    # first-order propagation over (a_S, a_AS, omega_x) from the fit, kappa and delta independent
    grad_fit = np.array([-g * rc / fit.a_S, g * rho / fit.a_S])
    dk, dd, dw = _log_envelope_gradient(kappa, delta, om)
    names = ("a_S", "a_AS", "omega_x")
    grad = np.append(grad_fit, g * rc * dw)
    cov = np.array([[fit.cov(a, b) for b in names] for a in names])
    var_stat = float(grad @ cov @ grad)
    var_sys = (g * rc * dk * kappa_sigma) ** 2 + (g * rc * dd * delta_sigma) ** 2
    sigma_stat = float(np.sqrt(max(var_stat, 0.0)))
    sigma = float(np.sqrt(max(var_stat, 0.0) + var_sys))

    logger.info("n = %.4f +- %.4f (stat %.4f) [%s]", n, sigma, sigma_stat, method)
    return OccupationResult(
        n=float(n),
        sigma_n=sigma,
        method=method,
        sigma_n_stat=sigma_stat,
        inputs_hash=fingerprint(fit.vector, kappa=kappa, delta=delta),
        low_confidence=fit.low_confidence,
        details={"ratio": fit.a_AS / fit.a_S, "envelope": 1.0 / rho},
    )


# ---------------------------------------------------------------------------
# band areas


def _foreign_excess(fit: SidebandFit, w: np.ndarray, side: int) -> np.ndarray:
    """Modelled excess at w of every fitted line except the x line on this side (+1 anti-Stokes, -1 Stokes)."""
    own = fit.a_AS if side > 0 else fit.a_S
    return sideband_model(fit.vector, w) - 1.0 - own * lorentzian(w - side * fit.omega_x, fit.gamma_x)


def _band_area(
    psd: PsdTrace, lo: float, hi: float, keep: np.ndarray, background: Optional[SidebandFit], side: int
) -> tuple[float, float, float]:
    """(area, variance, own-line fraction) of the floor-subtracted band; the fraction is 1 without a model."""
    sel = psd.select(lo, hi) & keep
    bw = psd.bin_width
    w = psd.freq[sel]
    excess = psd.psd[sel] - 1.0
    frac = 1.0
    if background is not None and w.size:
        excess = excess - _foreign_excess(background, w, side)
        frac = float(np.sum(lorentzian(w - side * background.omega_x, background.gamma_x)) * bw / np.pi)
    area = float(np.sum(excess) * bw)
    var = float(np.sum(psd.sigma()[sel] ** 2) * bw**2)
    return area, var, frac


def band_power_occupation(
    psd: PsdTrace,
    stokes_band: tuple[float, float],
    antistokes_band: tuple[float, float],
    kappa: float,
    delta: float,
    omega: float,
    *,
    kappa_sigma: float = 0.0,
    delta_sigma: float = TWO_PI * DETUNING_GOOD_SIGMA_HZ,
    mask: Optional[Sequence[tuple[float, float]]] = None,
    background: Optional[SidebandFit] = None,
    method: str = "band_power",
) -> OccupationResult:
    """
    Floor-subtracted band areas on both sides and the same envelope inversion at omega.

    Bands and mask intervals are magnitudes; the Stokes band is integrated at negative offsets.
    With a fitted background the other lines' modelled excess is removed from each band and the
    areas are divided by the fraction of the x line the band holds, so they compare to amplitudes.
    """
    s_lo, s_hi = sorted(abs(v) for v in stokes_band)
    a_lo, a_hi = sorted(abs(v) for v in antistokes_band)
    if not (np.isclose(s_lo, a_lo) and np.isclose(s_hi, a_hi)):
        logger.warning("band integration with asymmetric bands: %s vs %s", stokes_band, antistokes_band)

    keep = _mask_bins(psd.freq, mask)
    area_s, var_s, frac_s = _band_area(psd, -s_hi, -s_lo, keep, background, -1)
    area_as, var_as, frac_as = _band_area(psd, a_lo, a_hi, keep, background, +1)
    if frac_s <= 0 or frac_as <= 0:
        raise DomainError("band holds no part of the x line")
    area_s, var_s = area_s / frac_s, var_s / frac_s**2
    area_as, var_as = area_as / frac_as, var_as / frac_as**2

    h = fingerprint(psd.freq, psd.psd, bands=(s_lo, s_hi, a_lo, a_hi), kappa=kappa, delta=delta, mask=mask)
    details = {"area_S": area_s, "area_AS": area_as, "window_fraction": frac_as}

    if area_s <= 0 or area_as < 0:
        logger.warning("noise-dominated band areas (S=%.3g, AS=%.3g)", area_s, area_as)
        return OccupationResult(0.0, float("inf"), method, float("inf"), h, True, details)

    rho = float(cavity_response(kappa, delta, -omega) / cavity_response(kappa, delta, omega))
    r = area_as / area_s
    n = invert_ratio(r, kappa, delta, omega)
    rc = r * rho
    g = 1.0 / (1.0 - rc) ** 2
    var_stat = (g * rc) ** 2 * (var_s / area_s**2 + (var_as / area_as**2 if area_as > 0 else 0.0))
    if area_as == 0:
        var_stat = (g * rho / area_s) ** 2 * var_as
    dk, dd, _ = _log_envelope_gradient(kappa, delta, omega)
    var_sys = (g * rc * dk * kappa_sigma) ** 2 + (g * rc * dd * delta_sigma) ** 2
    snr_s = area_s / np.sqrt(var_s) if var_s > 0 else np.inf
    low = bool(snr_s < PEAK_SNR_MIN)
    if low:
        logger.warning("Stokes band area snr %.2f", snr_s)

    logger.info("n = %.4f from band areas [%s]", n, method)
    return OccupationResult(
        n=float(n),
        sigma_n=float(np.sqrt(var_stat + var_sys)),
        method=method,
        sigma_n_stat=float(np.sqrt(var_stat)),
        inputs_hash=h,
        low_confidence=low,
        details={**details, "ratio": r},
    )


def analyze_spectrum(
    psd: PsdTrace,
    config,
    *,
    include_y: bool = True,
    n_guess: Optional[float] = None,
    y_mask_widths: float = 5.0,
) -> dict[str, OccupationResult]:
    """
    All occupation estimates of one spectrum: joint x(+y) fit, x fit with the y lines masked,
    band areas around the x lines and the worst-case full-area integration.
    """
    het, trap, cav = config.heterodyne, config.trap, config.cavity
    kappa, delta = cav.kappa, config.drive.detuning
    errs = dict(kappa_sigma=cav.kappa_sigma, delta_sigma=config.drive.detuning_sigma or TWO_PI * DETUNING_GOOD_SIGMA_HZ)
    band = (het.band_lo, het.band_hi)
    results: dict[str, OccupationResult] = {}

    joint = fit_sidebands(psd, init_from_config(config, include_y, n_guess), band=band, include_y=include_y)
    results["joint_fit"] = occupation_from_asymmetry(joint, kappa, delta, **errs)

    y_half = y_mask_widths * het.gamma_y
    mask = [(trap.omega_y - y_half, trap.omega_y + y_half)]
    masked = fit_sidebands(psd, init_from_config(config, False, n_guess), mask, band=band, include_y=False)
    results["masked_fit"] = occupation_from_asymmetry(masked, kappa, delta, method="masked_fit", **errs)

    # x areas with the y lines cut out and the other lines' fitted tails removed
    om = joint.omega_x
    x_band = (max(om - het.gamma_x, band[0]), min(om + het.gamma_x, band[1]))
    results["band_power"] = band_power_occupation(
        psd, x_band, x_band, kappa, delta, om, mask=mask, background=joint, **errs
    )

    worst = tuple(TWO_PI * f for f in WORST_CASE_BAND_HZ)
    results["worst_case"] = band_power_occupation(psd, worst, worst, kappa, delta, om, method="worst_case", **errs)
    return results


def integrated_band_power(psd: PsdTrace, band: Optional[tuple[float, float]] = None) -> float:
    """Total power of both sidebands of a (lo, hi) magnitude band, floor included."""
    lo, hi = band if band is not None else tuple(TWO_PI * f for f in SHOT_NOISE_BAND_HZ)
    sel = psd.select(-hi, -lo) | psd.select(lo, hi)
    return float(np.sum(psd.psd[sel]) * psd.bin_width)


def band_powers_vs_lo(
    spectra: Sequence[PsdTrace], lo_powers: Sequence[float], band: Optional[tuple[float, float]] = None
) -> list[tuple[float, float]]:
    """(P_LO, integrated band power) pairs, the input of shot_noise_check."""
    if len(spectra) != len(lo_powers):
        raise DomainError(f"{len(spectra)} spectra for {len(lo_powers)} LO powers")
    return [(float(p), integrated_band_power(s, band)) for p, s in zip(lo_powers, spectra)]


# ---------------------------------------------------------------------------
# shot-noise linearity


@dataclass(frozen=True)
class ShotNoiseVerdict:
    linear: bool
    slope: float
    intercept: float
    intercept_sigma: float
    r2: float
    curvature: float
    curvature_sigma: float
    residual: float


def shot_noise_check(band_powers: Sequence[tuple[float, float]]) -> ShotNoiseVerdict:
    """
    Band power against LO power must be a line through the origin.

    Linear when the intercept is within 2 sigma of 0, R^2 > 0.99 and, with enough points,
    a quadratic term is consistent with 0.
    """
    pts = np.asarray(band_powers, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise DomainError("shot_noise_check needs at least 3 LO power levels")
    x, y = pts[:, 0], pts[:, 1]
    # rescaled so the covariance is well conditioned
    xs = x / np.max(np.abs(x)) if np.any(x) else x
    ys = y / np.max(np.abs(y)) if np.any(y) else y

    (slope, intercept), cov = np.polyfit(xs, ys, 1, cov="unscaled")
    resid = ys - (slope * xs + intercept)
    dof = max(xs.size - 2, 1)
    s2 = float(np.sum(resid**2)) / dof
    int_sigma = float(np.sqrt(cov[1, 1] * s2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0

    curv, curv_sigma, curv_ok = 0.0, 0.0, True
    if xs.size >= 4:
        coef, cov2 = np.polyfit(xs, ys, 2, cov="unscaled")
        resid2 = ys - np.polyval(coef, xs)
        s2q = float(np.sum(resid2**2)) / max(xs.size - 3, 1)
        curv = float(coef[0])
        curv_sigma = float(np.sqrt(cov2[0, 0] * s2q))
        curv_ok = abs(curv) <= 2.0 * curv_sigma + 1e-9

    linear = abs(intercept) <= 2.0 * int_sigma + 1e-9 and r2 > LINEAR_R2_MIN and curv_ok
    y_scale = np.max(np.abs(y)) if np.any(y) else 1.0
    x_scale = np.max(np.abs(x)) if np.any(x) else 1.0
    verdict = ShotNoiseVerdict(
        linear=bool(linear),
        slope=float(slope * y_scale / x_scale),
        intercept=float(intercept * y_scale),
        intercept_sigma=int_sigma * y_scale,
        r2=r2,
        curvature=curv * y_scale / x_scale**2,
        curvature_sigma=curv_sigma * y_scale / x_scale**2,
        residual=float(np.sqrt(s2)) * y_scale,
    )
    if not verdict.linear:
        logger.warning("band power not linear in LO power: %s", verdict)
    return verdict


def shot_noise_scan(
    config,
    lo_powers: Optional[Sequence[float]] = None,
    *,
    n_avg: Optional[int] = None,
    seed=None,
    quadratic: float = 0.0,
) -> tuple[list[tuple[float, float]], ShotNoiseVerdict]:
    """
    Synthesize the configured spectrum at several LO powers (default: LO_POWER_FRACTIONS of
    drive.lo_power), integrate the shot-noise bands and run the linearity check.
    """
    p_ref = config.drive.lo_power
    if not p_ref > 0:
        raise DomainError("shot-noise scan needs drive.lo_power > 0")
    powers = [f * p_ref for f in LO_POWER_FRACTIONS] if lo_powers is None else list(lo_powers)
    clean = heterodyne_model(spectrum_params_from_config(config, config.free_fall.n_bar), config_grid(config))
    spectra = lo_power_series(clean, powers, p_ref, n_avg=n_avg, seed=seed, quadratic=quadratic)
    points = band_powers_vs_lo(spectra, powers)
    return points, shot_noise_check(points)


# ---------------------------------------------------------------------------
# z motion and rate cross-check


def harmonic_area_ratio(T_z: float, m: float, Omega_z: float, k: float, z_R: float) -> float:
    """Second-to-first harmonic area ratio [k_B T / (m Omega^2)] ((k - 1/z_R)/2)^2."""
    require_positive(T_z=T_z, m=m, Omega_z=Omega_z)
    return K_B * T_z / (m * Omega_z**2) * ((k - 1.0 / z_R) / 2.0) ** 2


def z_temperature_from_harmonics(area_ratio: float, m: float, Omega_z: float, k: float, z_R: float) -> tuple[float, float]:
    if not area_ratio > 0:
        raise DomainError(f"area_ratio must be > 0, got {area_ratio!r}")
    require_positive(m=m, Omega_z=Omega_z, z_R=z_R)
    geom = ((k - 1.0 / z_R) / 2.0) ** 2
    if geom <= 0:
        raise DomainError("k and z_R give a vanishing harmonic coupling")
    T_z = area_ratio * m * Omega_z**2 / (K_B * geom)
    return T_z, K_B * T_z / (HBAR * Omega_z)


def crosscheck_occupation(
    Gamma_gas: float,
    Gamma_rec: float,
    gamma_x: float,
    *,
    sigma_gas: float = 0.0,
    sigma_rec: float = 0.0,
    sigma_gamma: float = 0.0,
) -> OccupationResult:
    """n = (Gamma_gas + Gamma_rec) / gamma_x."""
    require_positive(gamma_x=gamma_x)
    heat = Gamma_gas + Gamma_rec
    n = heat / gamma_x
    var = (sigma_gas**2 + sigma_rec**2) / gamma_x**2 + (n * sigma_gamma / gamma_x) ** 2
    sigma = float(np.sqrt(var))
    return OccupationResult(
        n=float(n),
        sigma_n=sigma,
        method="rate_ratio",
        sigma_n_stat=sigma,
        inputs_hash=fingerprint(Gamma_gas=Gamma_gas, Gamma_rec=Gamma_rec, gamma_x=gamma_x),
    )


def y_occupation_bound(Gamma_y: float, gamma_y_min: float) -> OccupationResult:
    """Upper bound n_y < Gamma_y / gamma_y_min. An estimate: Gamma_y itself is not measured."""
    require_positive(gamma_y_min=gamma_y_min)
    n = Gamma_y / gamma_y_min
    return OccupationResult(
        n=float(n),
        sigma_n=0.0,
        method="rate_ratio",
        inputs_hash=fingerprint(Gamma_y=Gamma_y, gamma_y_min=gamma_y_min),
        details={"bound": "upper", "estimate": True},
    )
