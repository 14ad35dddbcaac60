import numpy as np
import pytest
from scipy.integrate import trapezoid

from core.cavity import cavity_response
from core.constants import TWO_PI
from core.cooling import LinearModel, steady_state_covariance
from core.errors import DomainError, InstabilityError, PreconditionError
from core.specgen import (
    ModeParams,
    PsdTrace,
    SpectrumModelParams,
    config_grid,
    heterodyne_model,
    linear_response_psd,
    lo_power_series,
    lorentzian,
    sideband_grid,
    simulate_langevin,
    spectrum_params_from_config,
    synthesize_spectrum,
    welch_psd,
)

KAPPA = TWO_PI * 193e3
OMEGA = TWO_PI * 305e3


def _model(**kw):
    base = dict(omega=OMEGA, kappa=KAPPA, delta=OMEGA, g=KAPPA / 10, gamma_m=0.0, n_th=0.0, Gamma_extra=TWO_PI * 5e3)
    base.update(kw)
    return LinearModel(**base)


def _dt(model):
    return 0.05 * min(TWO_PI / model.omega, TWO_PI / model.kappa)


def test_lorentzian_peak_and_area():
    gamma = TWO_PI * 48e3
    x = np.linspace(-2000 * gamma, 2000 * gamma, 2_000_001)
    assert lorentzian(0.0, gamma) == pytest.approx(2.0 / gamma)
    assert trapezoid(lorentzian(x, gamma), x) == pytest.approx(np.pi, rel=1e-3)


def test_grid_is_symmetric_and_skips_carrier():
    grid = sideband_grid(TWO_PI * 100e3, TWO_PI * 500e3, TWO_PI * 250.0)
    assert grid == pytest.approx(-grid[::-1])
    assert np.min(np.abs(grid)) == pytest.approx(TWO_PI * 100e3)
    assert np.max(grid) == pytest.approx(TWO_PI * 500e3)


def test_model_amplitudes_carry_detailed_balance(paper_config):
    params = spectrum_params_from_config(paper_config, 0.43)
    a_s, a_as = params.amplitudes(params.modes[0])
    w = paper_config.sideband_weight_x
    assert a_s == pytest.approx(w * 1.43 * 0.0237, rel=0.02)
    assert a_as / a_s == pytest.approx(12.58, rel=0.01)


def test_model_floor_is_shot_noise(paper_config):
    params = spectrum_params_from_config(paper_config, 0.43, include_y=True)
    grid = TWO_PI * np.array([-50e6, 50e6])
    psd = heterodyne_model(params, grid)
    assert psd.psd == pytest.approx([1.0, 1.0], abs=1e-4)
    assert psd.n_avg is None


def test_shot_floor_is_fixed():
    with pytest.raises(DomainError):
        SpectrumModelParams(modes=(), kappa=KAPPA, delta=OMEGA, shot_floor=2.0)
    with pytest.raises(DomainError):
        ModeParams(omega=OMEGA, gamma=1.0, n_occ=-0.1, weight=1.0)


def test_synthesized_noise_statistics(paper_config):
    clean = heterodyne_model(spectrum_params_from_config(paper_config, 0.43), config_grid(paper_config))
    noisy = synthesize_spectrum(clean, 500, 7, het_freq=paper_config.drive.het_freq)
    ratio = noisy.psd / clean.psd
    assert ratio.mean() == pytest.approx(1.0, abs=0.005)
    assert ratio.var() == pytest.approx(1 / 500, rel=0.1)
    assert noisy.n_avg == 500
    assert noisy.abs_freq[0] == pytest.approx(paper_config.drive.het_freq + clean.freq[0])


def test_synthesis_is_reproducible(paper_config):
    clean = heterodyne_model(spectrum_params_from_config(paper_config, 1.0), config_grid(paper_config))
    a = synthesize_spectrum(clean, 100, 3)
    b = synthesize_spectrum(clean, 100, 3)
    assert np.array_equal(a.psd, b.psd)
    with pytest.raises(DomainError):
        synthesize_spectrum(clean, 0, 3)


def test_psd_trace_validation():
    with pytest.raises(DomainError):
        PsdTrace([1.0, 0.5], [1.0, 1.0])
    with pytest.raises(DomainError):
        PsdTrace([0.5, 1.0], [1.0, -1.0])


def test_linear_response_floor_and_asymmetry():
    model = _model()
    grid = np.array([-TWO_PI * 5e6, -OMEGA, OMEGA, TWO_PI * 5e6])
    psd = linear_response_psd(model, grid).psd
    assert psd[0] == pytest.approx(1.0, abs=1e-2)
    assert psd[-1] == pytest.approx(1.0, abs=1e-2)
    # red detuning: anti-Stokes light at +Omega dominates
    assert psd[2] - 1.0 > 5 * (psd[1] - 1.0)


def test_lorentzian_picture_of_linear_model():
    model = _model()
    params = SpectrumModelParams.from_linear_model(model)
    _, n = steady_state_covariance(model)
    mode = params.modes[0]
    assert mode.n_occ == pytest.approx(n)
    assert mode.omega == pytest.approx(OMEGA, rel=0.01)
    assert mode.weight == pytest.approx(16 * model.g**2 / KAPPA)


def test_simulation_preconditions():
    model = _model()
    with pytest.raises(PreconditionError):
        simulate_langevin(model, 10 * _dt(model), 0.05, 0)
    with pytest.raises(PreconditionError):
        simulate_langevin(model, _dt(model), 1e-5, 0)
    with pytest.raises(InstabilityError):
        simulate_langevin(_model(delta=-OMEGA, g=TWO_PI * 71e3), _dt(model), 0.05, 0)


def test_simulation_is_seeded():
    model = _model()
    a = simulate_langevin(model, _dt(model), 4e-3, 11)
    b = simulate_langevin(model, _dt(model), 4e-3, 11)
    assert np.array_equal(a.samples, b.samples)
    assert a.seed == 11
    assert a.model_hash == model.digest()


def test_chunking_does_not_change_the_record():
    model = _model()
    a = simulate_langevin(model, _dt(model), 4e-3, 5, chunk=1 << 12)
    b = simulate_langevin(model, _dt(model), 4e-3, 5, chunk=1 << 20)
    assert a.samples.size == b.samples.size
    assert a.samples[-100:] == pytest.approx(b.samples[-100:], rel=1e-6, abs=1e-6)


@pytest.mark.slow
def test_simulated_occupation_matches_lyapunov():
    model = _model()
    _, n = steady_state_covariance(model)
    trace = simulate_langevin(model, _dt(model), 0.2, 2024, keep_states=True)
    q, p = trace.states[:, 0], trace.states[:, 1]
    n_sim = 0.5 * (np.mean(q**2) + np.mean(p**2) - 1.0)
    assert n_sim == pytest.approx(n, rel=0.03)


@pytest.mark.slow
def test_welch_spectrum_of_simulation():
    model = _model()
    trace = simulate_langevin(model, _dt(model), 0.05, 99)
    psd = welch_psd(trace, 4096)
    far = psd.select(TWO_PI * 1.5e6, TWO_PI * 2.5e6) | psd.select(-TWO_PI * 2.5e6, -TWO_PI * 1.5e6)
    assert psd.psd[far].mean() == pytest.approx(1.0, abs=0.03)
    near_as = psd.select(OMEGA - TWO_PI * 2e3, OMEGA + TWO_PI * 2e3)
    near_s = psd.select(-OMEGA - TWO_PI * 2e3, -OMEGA + TWO_PI * 2e3)
    assert psd.psd[near_as].mean() > 3 * psd.psd[near_s].mean()
    assert psd.n_avg > 100


def test_welch_argument_checks():
    model = _model()
    trace = simulate_langevin(model, _dt(model), 4e-3, 1)
    with pytest.raises(DomainError):
        welch_psd(trace, trace.samples.size + 1)
    with pytest.raises(DomainError):
        welch_psd(trace, 256, window="blackman")


@pytest.mark.slow
def test_welch_matches_exact_response_at_published_coupling(paper_config):
    from core.cooling import build_linear_model

    model = build_linear_model(paper_config)
    trace = simulate_langevin(model, _dt(model), 0.1, 8)
    psd = welch_psd(trace, 4096)
    band = psd.select(TWO_PI * 200e3, TWO_PI * 400e3) | psd.select(-TWO_PI * 400e3, -TWO_PI * 200e3)
    exact = linear_response_psd(model, psd.freq[band]).psd
    assert np.mean(psd.psd[band] / exact) == pytest.approx(1.0, abs=0.03)


@pytest.mark.slow
def test_welch_matches_lorentzian_picture_in_weak_coupling():
    model = _model()
    trace = simulate_langevin(model, _dt(model), 0.2, 31)
    psd = welch_psd(trace, 4096)
    band = psd.select(TWO_PI * 250e3, TWO_PI * 360e3) | psd.select(-TWO_PI * 360e3, -TWO_PI * 250e3)
    expected = heterodyne_model(SpectrumModelParams.from_linear_model(model), psd.freq[band]).psd
    ratio = psd.psd[band] / expected
    # 8-bin blocks average out the periodogram scatter
    blocks = ratio[: ratio.size // 8 * 8].reshape(-1, 8).mean(axis=1)
    assert np.sqrt(np.mean((blocks - 1.0) ** 2)) < 0.05


@pytest.mark.parametrize("delta", [0.5 * OMEGA, OMEGA, 1.7 * OMEGA])
def test_envelope_is_invariant_under_joint_sign_flip(delta):
    w = np.linspace(-3 * OMEGA, 3 * OMEGA, 601)
    classical = dict(modes=(), kappa=KAPPA, classical_level=4.0)
    s = heterodyne_model(SpectrumModelParams(delta=delta, **classical), w).psd
    s_flip = heterodyne_model(SpectrumModelParams(delta=-delta, **classical), -w).psd
    assert s_flip == pytest.approx(s, rel=1e-12)

    mode = ModeParams(OMEGA, TWO_PI * 5e3, 0.7, 3.0)
    a_s, a_as = SpectrumModelParams(modes=(mode,), kappa=KAPPA, delta=delta).amplitudes(mode)
    f_s, f_as = SpectrumModelParams(modes=(mode,), kappa=KAPPA, delta=-delta).amplitudes(mode)
    # the cavity filter swaps sides, the occupation factors stay put
    assert f_s / (mode.n_occ + 1) == pytest.approx(a_as / mode.n_occ, rel=1e-12)
    assert f_as / mode.n_occ == pytest.approx(a_s / (mode.n_occ + 1), rel=1e-12)


def test_sideband_area_ratio_on_random_draws():
    rng = np.random.default_rng(1000)
    for _ in range(1000):
        kappa = TWO_PI * rng.uniform(10e3, 1e6)
        omega = TWO_PI * rng.uniform(50e3, 1e6)
        delta = TWO_PI * rng.uniform(-1.5e6, 1.5e6)
        n = 10 ** rng.uniform(-3, 3)
        mode = ModeParams(omega, TWO_PI * rng.uniform(1e3, 50e3), n, rng.uniform(0.1, 10.0))
        a_s, a_as = SpectrumModelParams(modes=(mode,), kappa=kappa, delta=delta).amplitudes(mode)
        # each Lorentzian holds pi times its amplitude
        expected = n / (n + 1) * cavity_response(kappa, delta, omega) / cavity_response(kappa, delta, -omega)
        assert (np.pi * a_as) / (np.pi * a_s) == pytest.approx(expected, rel=1e-10)


def test_lo_power_series_scales_floor_and_sidebands(paper_config):
    clean = heterodyne_model(spectrum_params_from_config(paper_config, 0.43), config_grid(paper_config))
    traces = lo_power_series(clean, [1e-4, 4e-4, 8e-4], 4e-4)
    assert [t.psd.max() / clean.psd.max() for t in traces] == pytest.approx([0.25, 1.0, 2.0])
    quad = lo_power_series(clean, [8e-4], 4e-4, quadratic=0.1)[0]
    assert quad.psd == pytest.approx(2.0 * clean.psd + 0.4)


def test_lo_power_series_argument_checks(paper_config):
    clean = heterodyne_model(spectrum_params_from_config(paper_config, 0.43), config_grid(paper_config))
    with pytest.raises(DomainError):
        lo_power_series(clean, [-1e-4], 4e-4)
    with pytest.raises(DomainError):
        lo_power_series(clean, [1e-4], 0.0)
    with pytest.raises(DomainError):
        lo_power_series(clean, [1e-4], 4e-4, quadratic=-0.1)
