from __future__ import annotations

import numpy as np
import streamlit as st

from core.budget import total_budget
from core.config import load_config
from core.constants import MBAR_TO_PA, TWO_PI
from core.cooling import backaction_limit, build_linear_model, detuning_sweep, steady_state_covariance
from core.errors import LevicoolError
from visualisations.cooling_budget import render_budget, render_sweep


@st.cache_data(show_spinner=False)
def load_experiment():
    return load_config()


@st.cache_data(show_spinner="Solving Lyapunov equations...")
def run_sweep(lo_mbar: float, hi_mbar: float, step_khz: float):
    config = load_experiment()
    omega_hz = config.trap.omega_x / TWO_PI
    grid = np.arange(omega_hz - 200e3, omega_hz + 200e3 + 1.0, step_khz * 1e3)
    return detuning_sweep(config, TWO_PI * grid, (lo_mbar * MBAR_TO_PA, hi_mbar * MBAR_TO_PA), workers=4)


def render_page() -> None:
    st.set_page_config(page_title="Cooling and Budget", layout="wide")

    st.title("Cooling and Heating Budget")
    st.write(
        "The linearised model of particle and cavity is solved exactly for its steady state. Sweeping the "
        "detuning shows where cooling is strongest; the band spans the pressure uncertainty of the measurement."
    )

    try:
        config = load_experiment()
    except LevicoolError as e:
        st.error(f"Failed to load config: {e}")
        st.stop()

    lo, hi = config.environment.pressure_range or (config.environment.pressure,) * 2
    c1, c2 = st.columns(2)
    p_lo = c1.number_input("low pressure (mbar)", value=lo / MBAR_TO_PA, format="%.2e")
    p_hi = c2.number_input("high pressure (mbar)", value=hi / MBAR_TO_PA, format="%.2e")
    step = st.select_slider("detuning step (kHz)", options=[2.5, 5.0, 10.0, 20.0], value=5.0)

    if not 0 < p_lo <= p_hi:
        st.warning("Low pressure must be positive and not above the high pressure.")
        st.stop()

    df = run_sweep(float(p_lo), float(p_hi), float(step))
    render_sweep(df, config.trap.omega_x / TWO_PI, config.free_fall.n_bar)

    _, n_now = steady_state_covariance(build_linear_model(config))
    st.write(
        f"At the configured point the model gives n_x = {n_now:.2f}; the resolved-sideband floor is "
        f"(κ/4Ω)² = {backaction_limit(config.cavity.kappa, config.trap.omega_x):.3f}."
    )

    st.divider()
    budget = total_budget(config)
    render_budget(budget.as_report())

    with st.expander("What goes into the budget?", expanded=False):
        st.caption(
            """
    • **gas**: collisions with residual gas (measured rate when configured, Epstein drag otherwise)
    • **recoil**: momentum kicks from Rayleigh-scattered tweezer photons
    • **phase noise**: quoted upper bound, passed through
    • **intensity noise**: parametric damping at 2Ω, negligible at −135 dB/Hz
            """.strip()
        )


if __name__ == "__main__":
    render_page()
