import numpy as np
import pytest

from core.constants import HBAR, K_B, TWO_PI
from core.cooling import LinearModel, steady_state_covariance
from core.errors import DomainError, FitError, UnphysicalAsymmetryError
from core.specgen import (
    PsdTrace,
    config_grid,
    heterodyne_model,
    linear_response_psd,
    spectrum_params_from_config,
    synthesize_spectrum,
)
from core.thermo import (
    OccupationResult,
    analyze_spectrum,
    auto_init,
    band_power_occupation,
    band_powers_vs_lo,
    crosscheck_occupation,
    fit_sidebands,
    harmonic_area_ratio,
    init_from_config,
    integrated_band_power,
    invert_ratio,
    occupation_from_asymmetry,
    shot_noise_check,
    shot_noise_scan,
    y_occupation_bound,
    z_temperature_from_harmonics,
)

KAPPA = TWO_PI * 193e3
DELTA = TWO_PI * 315e3
OMEGA = TWO_PI * 305e3
N_TRUE = 0.43
EPS = np.array([-5.0, 7.0, 4.0, -4.0, -7.0, 5.0])
LO_POWER = np.arange(1.0, 7.0)


def _spectrum(config, n, include_y=False, n_avg=None, seed=0):
    clean = heterodyne_model(spectrum_params_from_config(config, n, include_y=include_y), config_grid(config))
    if n_avg is None:
        return clean
    return synthesize_spectrum(clean, n_avg, seed, het_freq=config.drive.het_freq)


def test_invert_ratio_limits():
    assert invert_ratio(0.0, KAPPA, DELTA, OMEGA) == 0.0
    envelope = (1 / (1 + (10 / 96.5) ** 2)) / (1 / (1 + (620 / 96.5) ** 2))
    assert invert_ratio(0.5 * envelope, KAPPA, DELTA, OMEGA) == pytest.approx(1.0)
    with pytest.raises(UnphysicalAsymmetryError):
        invert_ratio(1.01 * envelope, KAPPA, DELTA, OMEGA)


def test_joint_fit_recovers_noiseless_occupation(paper_config):
    psd = _spectrum(paper_config, N_TRUE)
    results = analyze_spectrum(psd, paper_config, include_y=False)
    assert set(results) == {"joint_fit", "masked_fit", "band_power", "worst_case"}
    assert results["joint_fit"].n == pytest.approx(N_TRUE, rel=1e-4)
    assert results["masked_fit"].n == pytest.approx(N_TRUE, rel=1e-4)
    assert results["band_power"].n == pytest.approx(results["joint_fit"].n, rel=0.01)
    # +-gamma_x around omega_x holds (2/pi) atan 2 of the line; the y cut 265-285 kHz removes another slice
    y_cut = (np.arctan(40 / 24) - np.arctan(20 / 24)) / np.pi
    assert results["band_power"].details["window_fraction"] == pytest.approx(2 / np.pi * np.arctan(2.0) - y_cut, rel=0.01)


def test_y_mode_inflates_only_the_worst_case(paper_config):
    psd = _spectrum(paper_config, N_TRUE, include_y=True)
    results = analyze_spectrum(psd, paper_config, include_y=True)
    joint = results["joint_fit"].n
    assert joint == pytest.approx(N_TRUE, rel=1e-3)
    assert results["masked_fit"].n == pytest.approx(N_TRUE, abs=0.1)
    assert results["band_power"].n == pytest.approx(joint, rel=0.01)
    assert joint < results["worst_case"].n < 1.0


def test_noisy_fit_within_uncertainty(paper_config):
    psd = _spectrum(paper_config, N_TRUE, n_avg=500, seed=1)
    fit = fit_sidebands(psd, init_from_config(paper_config), band=(TWO_PI * 100e3, TWO_PI * 500e3))
    occ = occupation_from_asymmetry(
        fit,
        paper_config.cavity.kappa,
        paper_config.drive.detuning,
        kappa_sigma=paper_config.cavity.kappa_sigma,
        delta_sigma=paper_config.drive.detuning_sigma,
    )
    assert abs(occ.n - N_TRUE) <= 3 * occ.sigma_n
    assert occ.sigma_n <= 0.05
    assert 0 < occ.sigma_n_stat < occ.sigma_n
    assert not occ.low_confidence
    assert fit.chi2_red == pytest.approx(1.0, abs=0.15)
    assert len(occ.inputs_hash) == 16


def test_auto_init_finds_x_and_y(paper_config):
    psd = _spectrum(paper_config, 1.0, include_y=True, n_avg=500, seed=4)
    guess = auto_init(psd, (TWO_PI * 100e3, TWO_PI * 500e3), include_y=True)
    assert guess.omega_x == pytest.approx(OMEGA, rel=0.03)
    assert guess.omega_y == pytest.approx(TWO_PI * 275e3, rel=0.03)
    fit = fit_sidebands(psd, guess, band=(TWO_PI * 100e3, TWO_PI * 500e3))
    assert fit.has_y
    assert fit.omega_x == pytest.approx(OMEGA, rel=1e-3)


def test_auto_init_without_a_peak():
    grid = np.linspace(-TWO_PI * 500e3, TWO_PI * 500e3, 2001)
    psd = PsdTrace(grid, np.ones(grid.size), n_avg=500)
    with pytest.raises(FitError):
        auto_init(psd, (TWO_PI * 100e3, TWO_PI * 500e3))


def test_include_y_needs_y_guess(paper_config):
    psd = _spectrum(paper_config, N_TRUE)
    with pytest.raises(DomainError):
        fit_sidebands(psd, init_from_config(paper_config), include_y=True)


def test_band_power_on_bare_shot_noise():
    grid = np.linspace(-TWO_PI * 500e3, TWO_PI * 500e3, 2001)
    psd = PsdTrace(grid, np.ones(grid.size), n_avg=100)
    band = (TWO_PI * 250e3, TWO_PI * 350e3)
    occ = band_power_occupation(psd, band, band, KAPPA, DELTA, OMEGA)
    assert occ.n == 0.0
    assert occ.sigma_n == np.inf
    assert occ.low_confidence


def test_exact_response_areas_give_lyapunov_occupation():
    model = LinearModel(omega=OMEGA, kappa=KAPPA, delta=OMEGA, g=KAPPA / 20, gamma_m=0.0, n_th=0.0,
                        Gamma_extra=TWO_PI * 2e3)
    _, n = steady_state_covariance(model)
    lam = model.mechanical_eigenvalue
    om, gam = abs(lam.imag), -2.0 * lam.real
    offsets = np.linspace(-10 * gam, 10 * gam, 401)
    anti = linear_response_psd(model, om + offsets).psd - 1.0
    stokes = linear_response_psd(model, -om + offsets).psd - 1.0
    n_est = invert_ratio(anti.sum() / stokes.sum(), KAPPA, OMEGA, om)
    assert n_est == pytest.approx(n, rel=0.05)


def test_shot_noise_line_passes():
    verdict = shot_noise_check(list(zip(LO_POWER, 2.0 * LO_POWER + 0.01 * EPS)))
    assert verdict.linear
    assert verdict.slope == pytest.approx(2.0, rel=1e-6)
    assert verdict.r2 > 0.99


def test_shot_noise_curvature_fails():
    y = 2.0 * LO_POWER + 0.3 * LO_POWER**2 + 0.01 * EPS
    assert not shot_noise_check(list(zip(LO_POWER, y))).linear


def test_shot_noise_offset_fails():
    y = 2.0 * LO_POWER + 3.0 + 0.01 * EPS
    verdict = shot_noise_check(list(zip(LO_POWER, y)))
    assert not verdict.linear
    assert verdict.intercept == pytest.approx(3.0, abs=0.05)


def test_shot_noise_needs_three_levels():
    with pytest.raises(DomainError):
        shot_noise_check([(1.0, 2.0), (2.0, 4.0)])


def test_band_power_of_flat_floor_is_its_width():
    w = np.linspace(-TWO_PI * 400e3, TWO_PI * 400e3, 3201)
    psd = PsdTrace(w, np.full(w.size, 2.0))
    power = integrated_band_power(psd, (TWO_PI * 250.1e3, TWO_PI * 349.9e3))
    # bins at 250.25 ... 349.75 kHz, 399 per side
    assert power == pytest.approx(2.0 * 2 * 399 * psd.bin_width)


def test_band_powers_need_one_spectrum_per_lo_power():
    w = np.linspace(-TWO_PI * 400e3, TWO_PI * 400e3, 801)
    psd = PsdTrace(w, np.ones(w.size))
    with pytest.raises(DomainError):
        band_powers_vs_lo([psd, psd], [1e-4])


def test_shot_noise_scan_passes_for_pure_shot_noise(paper_config):
    points, verdict = shot_noise_scan(paper_config)
    assert len(points) == 6
    assert verdict.linear
    assert verdict.intercept == pytest.approx(0.0, abs=1e-9 * points[-1][1])


@pytest.mark.parametrize("quadratic", [0.02, 0.1, 1.0])
def test_shot_noise_scan_rejects_excess_noise(paper_config, quadratic):
    _, verdict = shot_noise_scan(paper_config, quadratic=quadratic)
    assert not verdict.linear
    assert verdict.curvature > 0


def test_shot_noise_scan_needs_lo_power(paper_config):
    with pytest.raises(DomainError):
        shot_noise_scan(paper_config.with_updates("drive", lo_power=0.0))


def test_z_temperature_from_harmonics(paper_config):
    m = paper_config.particle.mass
    omega_z = paper_config.trap.omega_z
    k, z_r = paper_config.trap.wavenumber, paper_config.trap.rayleigh_length
    ratio = harmonic_area_ratio(80.0, m, omega_z, k, z_r)
    T_z, n_z = z_temperature_from_harmonics(ratio, m, omega_z, k, z_r)
    assert T_z == pytest.approx(80.0)
    assert n_z == pytest.approx(K_B * 80.0 / (HBAR * omega_z))
    assert n_z == pytest.approx(2.08e7, rel=0.01)
    with pytest.raises(DomainError):
        z_temperature_from_harmonics(0.0, m, omega_z, k, z_r)


def test_rate_crosscheck():
    occ = crosscheck_occupation(TWO_PI * 16.1e3, TWO_PI * 6e3, TWO_PI * 48e3, sigma_gamma=TWO_PI * 4.8e3)
    assert occ.n == pytest.approx(22.1 / 48)
    assert occ.method == "rate_ratio"
    assert occ.sigma_n == pytest.approx(0.1 * occ.n)


def test_y_bound_is_flagged_as_estimate():
    occ = y_occupation_bound(TWO_PI * 20e3, TWO_PI * 2e3)
    assert occ.n == pytest.approx(10.0)
    assert occ.details["estimate"] is True


def test_result_validation():
    with pytest.raises(DomainError):
        OccupationResult(n=0.4, sigma_n=0.1, method="guess")
    with pytest.raises(DomainError):
        OccupationResult(n=-0.1, sigma_n=0.1, method="joint_fit")


def test_statistical_error_scales_with_averages(paper_config):
    clean = _spectrum(paper_config, N_TRUE)
    sigmas = []
    for n_avg in (50, 500, 5000):
        psd = PsdTrace(clean.freq, clean.psd, n_avg=n_avg)
        fit = fit_sidebands(psd, init_from_config(paper_config), band=(TWO_PI * 100e3, TWO_PI * 500e3))
        occ = occupation_from_asymmetry(fit, paper_config.cavity.kappa, paper_config.drive.detuning)
        sigmas.append(occ.sigma_n_stat)
    assert sigmas[1] / sigmas[0] == pytest.approx(np.sqrt(0.1), rel=1e-3)
    assert sigmas[2] / sigmas[1] == pytest.approx(np.sqrt(0.1), rel=1e-3)


def _agree(a, b):
    return abs(a.n - b.n) <= 2.0 * np.hypot(a.sigma_n, b.sigma_n)


def test_methods_agree_on_noisy_spectrum_with_y(paper_config):
    psd = _spectrum(paper_config, N_TRUE, include_y=True, n_avg=500, seed=3)
    results = analyze_spectrum(psd, paper_config, include_y=True)
    joint, masked, band = results["joint_fit"], results["masked_fit"], results["band_power"]
    assert _agree(joint, masked)
    assert _agree(joint, band)
    assert _agree(masked, band)
    assert joint.n < results["worst_case"].n < 1.0


def test_band_power_background_removes_mirror_tail(paper_config):
    psd = _spectrum(paper_config, N_TRUE)
    fit = fit_sidebands(psd, init_from_config(paper_config), band=(TWO_PI * 100e3, TWO_PI * 500e3))
    band = (OMEGA - TWO_PI * 48e3, OMEGA + TWO_PI * 48e3)
    raw = band_power_occupation(psd, band, band, KAPPA, DELTA, fit.omega_x)
    corrected = band_power_occupation(psd, band, band, KAPPA, DELTA, fit.omega_x, background=fit)
    assert raw.n < 0.97 * N_TRUE
    assert corrected.n == pytest.approx(N_TRUE, rel=1e-4)
