import numpy as np
import pytest

from core.cavity import (
    TransmissionScan,
    asymmetry_ratio,
    calibrate_position,
    cavity_length,
    cavity_response,
    estimate_detuning,
    finesse,
    fit_linewidth,
    intracavity_photons,
    node_offset_to_photons,
    synthesize_classical_noise,
    synthesize_scans,
)
from core.constants import TWO_PI
from core.errors import CalibrationError, DomainError, FitError
from core.specgen import PsdTrace, sideband_grid

KAPPA = TWO_PI * 193e3
DELTA = TWO_PI * 315e3
FSR = TWO_PI * 14.0192e9
WAVELENGTH = 1.064e-6


def test_response_is_one_on_resonance_and_half_at_half_width():
    assert cavity_response(KAPPA, DELTA, DELTA) == pytest.approx(1.0)
    assert cavity_response(KAPPA, DELTA, DELTA + KAPPA / 2) == pytest.approx(0.5)
    assert cavity_response(KAPPA, DELTA, DELTA - KAPPA / 2) == pytest.approx(0.5)


def test_response_rejects_non_positive_linewidth():
    with pytest.raises(DomainError):
        cavity_response(0.0, DELTA, 0.0)


@pytest.mark.parametrize("omega_hz", [50e3, 305e3, 700e3])
def test_asymmetry_matches_response_ratio(omega_hz):
    w = TWO_PI * omega_hz
    expected = cavity_response(KAPPA, DELTA, w) / cavity_response(KAPPA, DELTA, -w)
    assert asymmetry_ratio(KAPPA, DELTA, w) == pytest.approx(expected)


def test_no_asymmetry_on_resonance():
    w = TWO_PI * np.array([100e3, 305e3])
    assert asymmetry_ratio(KAPPA, 0.0, w) == pytest.approx([1.0, 1.0])


def test_length_and_finesse_from_fsr():
    assert cavity_length(FSR) == pytest.approx(0.01069, rel=1e-3)
    assert finesse(FSR, KAPPA) == pytest.approx(72638, rel=1e-3)


def test_linewidth_from_synthetic_scans(rng):
    scans = synthesize_scans(KAPPA, 26, rng, noise=0.02, fsr=FSR)
    fit = fit_linewidth(scans)
    assert abs(fit.kappa - KAPPA) < TWO_PI * 4e3
    assert 0 < fit.sigma < TWO_PI * 4e3
    assert fit.per_scan.size == 26
    assert fit.finesse == pytest.approx(72638, rel=0.03)


@pytest.mark.parametrize("span", [6.0, 10.0, 40.0])
def test_noiseless_scan_gives_exact_linewidth(rng, span):
    scans = synthesize_scans(KAPPA, 1, rng, noise=0.0, span=span * KAPPA)
    fit = fit_linewidth(scans)
    assert fit.kappa == pytest.approx(KAPPA, rel=1e-6)


def test_linewidth_scan_to_scan_spread_sets_sigma(rng):
    scans = synthesize_scans(KAPPA, 26, rng, noise=0.005, kappa_spread=TWO_PI * 10e3)
    fit = fit_linewidth(scans)
    # standard error of 26 draws with a 10 kHz spread
    assert fit.sigma / TWO_PI == pytest.approx(10e3 / np.sqrt(26), rel=0.5)
    assert fit.fsr is None and fit.finesse is None


def test_flat_scan_is_a_fit_error():
    grid = np.linspace(-1e6, 1e6, 101)
    with pytest.raises(FitError) as info:
        fit_linewidth([TransmissionScan(grid, np.full(grid.size, 0.3), scan_id="flat")])
    assert info.value.scan_id == "flat"


def test_scan_validation():
    grid = np.linspace(-1.0, 1.0, 11)
    with pytest.raises(DomainError):
        TransmissionScan(grid[::-1], np.ones(11))
    with pytest.raises(DomainError):
        TransmissionScan(grid, -np.ones(11))
    with pytest.raises(DomainError):
        fit_linewidth([])


def test_detuning_from_classical_floor(rng):
    grid = sideband_grid(TWO_PI * 100e3, TWO_PI * 500e3, TWO_PI * 250.0)
    psd = synthesize_classical_noise(KAPPA, DELTA, grid, level=50.0, n_avg=500, rng=rng)
    est = estimate_detuning(psd, (TWO_PI * 100e3, TWO_PI * 500e3), KAPPA)
    assert abs(est.delta - DELTA) < TWO_PI * 5e3
    assert est.good and not est.low_confidence


def test_detuning_sign_follows_asymmetry(rng):
    grid = sideband_grid(TWO_PI * 100e3, TWO_PI * 500e3, TWO_PI * 250.0)
    psd = synthesize_classical_noise(KAPPA, -DELTA, grid, level=50.0, n_avg=500, rng=rng)
    est = estimate_detuning(psd, (TWO_PI * 100e3, TWO_PI * 500e3), KAPPA)
    assert est.delta < 0


def test_detuning_without_classical_noise_is_low_confidence():
    grid = sideband_grid(TWO_PI * 100e3, TWO_PI * 500e3, TWO_PI * 1e3)
    psd = PsdTrace(grid, np.ones(grid.size), n_avg=500)
    est = estimate_detuning(psd, (TWO_PI * 100e3, TWO_PI * 500e3), KAPPA)
    assert est.low_confidence and not est.good
    assert est.sigma == np.inf


def test_detuning_needs_both_sides():
    grid = np.linspace(TWO_PI * 100e3, TWO_PI * 500e3, 400)
    psd = PsdTrace(grid, np.full(grid.size, 2.0), n_avg=10)
    with pytest.raises(DomainError):
        estimate_detuning(psd, (TWO_PI * 100e3, TWO_PI * 500e3), KAPPA)


def test_photons_vanish_at_node():
    k = TWO_PI / WAVELENGTH
    at_antinode = intracavity_photons(2.5e10, KAPPA, DELTA, 0.0, k)
    at_node = intracavity_photons(2.5e10, KAPPA, DELTA, WAVELENGTH / 4, k)
    assert at_antinode == pytest.approx(2.5e10**2 / ((KAPPA / 2) ** 2 + DELTA**2))
    assert at_node < 1e-20 * at_antinode


def test_position_calibration_inverts_photon_number():
    offsets = np.linspace(0.0, WAVELENGTH / 4, 9)
    heights = 3.0 * node_offset_to_photons(offsets, WAVELENGTH)
    trace = calibrate_position(heights, 3.0, WAVELENGTH)
    assert trace.inferred_offset_from_node == pytest.approx(offsets, abs=1e-15)
    assert trace.max_offset == pytest.approx(WAVELENGTH / 4)
    assert trace.time.size == offsets.size


def test_position_calibration_rejects_bad_heights():
    with pytest.raises(CalibrationError):
        calibrate_position([0.1, 1.2], 1.0, WAVELENGTH)
    with pytest.raises(CalibrationError):
        calibrate_position([-0.1], 1.0, WAVELENGTH)
