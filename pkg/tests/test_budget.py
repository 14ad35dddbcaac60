import math

import pytest

from core.budget import (
    aggregate,
    axis_heating,
    gas_heating,
    intensity_noise_damping,
    phase_noise_phonons,
    recoil_heating,
    total_budget,
)
from core.constants import TWO_PI
from core.errors import DomainError


def test_epstein_rate_is_close_to_the_measured_one(paper_config):
    env, particle = paper_config.environment, paper_config.particle
    _, heating = gas_heating(
        env.pressure, env.temperature, env.gas_molecule_mass, particle.radius, particle.mass, paper_config.trap.omega_x
    )
    assert 0.5 < heating / (TWO_PI * 16.1e3) < 2.0


def test_gas_heating_scales_with_pressure(paper_config):
    env, particle = paper_config.environment, paper_config.particle
    args = (env.temperature, env.gas_molecule_mass, particle.radius, particle.mass, paper_config.trap.omega_x)
    gamma_1, heat_1 = gas_heating(1e-4, *args)
    gamma_2, heat_2 = gas_heating(2e-4, *args)
    assert gamma_2 == pytest.approx(2 * gamma_1)
    assert heat_2 == pytest.approx(2 * heat_1)


def test_recoil_rate_and_axis_ordering(paper_config):
    trap, particle = paper_config.trap, paper_config.particle
    rec_x = recoil_heating(trap, particle, "x")
    assert 0.5 < rec_x / (TWO_PI * 6e3) < 2.0
    # z has the largest direction factor and the lowest frequency
    assert recoil_heating(trap, particle, "z") > rec_x > 0
    with pytest.raises(DomainError):
        recoil_heating(trap, particle, "w")


def test_phase_noise_phonons():
    assert phase_noise_phonons(1e4, TWO_PI * 193e3, 0.1) == pytest.approx(1e3 / (TWO_PI * 193e3))
    with pytest.raises(DomainError):
        phase_noise_phonons(-1.0, TWO_PI * 193e3, 0.1)


def test_intensity_noise_damping_is_negative_millihertz():
    gamma = intensity_noise_damping(305e3, 10 ** -13.5)
    assert gamma == pytest.approx(-(math.pi**2) * 305e3**2 * 10 ** -13.5)
    assert -10e-3 < gamma / TWO_PI < -2e-3


def test_aggregate():
    assert aggregate(1.0, 2.0) == 3.0
    assert aggregate(1.0, 2.0, 0.5) == 3.5


def test_total_budget_uses_measured_gas_rate(paper_config):
    budget = total_budget(paper_config)
    assert budget.gas_provenance == "measured"
    assert budget.Gamma_gas == pytest.approx(TWO_PI * 16.1e3)
    assert budget.Gamma_total == pytest.approx(budget.Gamma_gas + budget.Gamma_rec + budget.Gamma_phase)
    assert budget.T_trap == pytest.approx(1.0 / budget.Gamma_total)
    assert budget.n_phase < 0.025
    assert budget.cooperativity > 3


def test_budget_without_phase_noise(paper_config):
    with_phase = total_budget(paper_config)
    without = total_budget(paper_config, include_phase=False)
    assert without.Gamma_phase == 0.0
    assert with_phase.Gamma_total - without.Gamma_total == pytest.approx(TWO_PI * 200.0)


def test_measured_gas_rate_follows_pressure(paper_config):
    low = total_budget(paper_config, pressure=paper_config.environment.pressure / 10)
    assert low.Gamma_gas == pytest.approx(TWO_PI * 1.61e3)


def test_report_items_carry_units_and_provenance(paper_config):
    report = total_budget(paper_config).as_report()
    assert report["Gamma_gas"]["unit"] == "Hz (/2pi)"
    assert report["Gamma_gas"]["value"] == pytest.approx(16.1e3)
    assert report["Gamma_phase"]["provenance"] == "pass-through"
    assert -10e-3 < report["gamma_int_x"]["value"] < -2e-3
    assert set(report) >= {"n_phase", "n_int", "c_pp", "c_qq", "cooperativity", "N_osc"}


def test_axis_heating_y_and_z_are_estimates(paper_config):
    rates = axis_heating(paper_config, "z")
    assert rates["axis"] == "z"
    assert rates["Gamma_total"] == pytest.approx(rates["Gamma_gas"] + rates["Gamma_rec"])
    # the measured x gas rate is rescaled by 1/Omega
    assert rates["Gamma_gas"] == pytest.approx(TWO_PI * 16.1e3 * 305 / 80)
