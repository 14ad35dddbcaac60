from __future__ import annotations

import streamlit as st

from core.config import load_config
from core.constants import TWO_PI
from core.errors import LevicoolError
from core.specgen import config_grid, heterodyne_model, spectrum_params_from_config, synthesize_spectrum
from core.thermo import analyze_spectrum
from visualisations.thermometry import render_methods, render_spectrum


# redundant from overview, ok for standalone page
@st.cache_data(show_spinner=False)
def load_experiment():
    return load_config()


@st.cache_data(show_spinner="Synthesizing and fitting...")
def run_thermometry(n_true: float, delta_khz: float, n_avg: int, include_y: bool, seed: int):
    config = load_experiment().with_updates("drive", detuning=TWO_PI * delta_khz * 1e3)
    params = spectrum_params_from_config(config, n_true, include_y=include_y)
    clean = heterodyne_model(params, config_grid(config))
    noisy = synthesize_spectrum(clean, n_avg, seed, het_freq=config.drive.het_freq)
    results = analyze_spectrum(noisy, config, include_y=include_y, n_guess=max(n_true, 0.1))
    return config, noisy, clean, results


def render_page() -> None:
    st.set_page_config(page_title="Sideband Thermometry", layout="wide")

    st.title("Sideband Thermometry")
    st.write(
        "Stokes scattering adds a phonon and happens with weight n+1, anti-Stokes removes one with weight n. "
        "Once the cavity envelope is divided out, the ratio of the two sidebands gives n without any other "
        "calibration. Pick a true occupation, synthesize a noisy averaged spectrum and see what comes back."
    )

    c1, c2, c3, c4 = st.columns(4)
    n_true = c1.select_slider("true n_x", options=[0.1, 0.2, 0.43, 1.0, 2.0, 5.0, 10.0, 50.0], value=0.43)
    delta_khz = c2.slider("detuning Δ/2π (kHz)", 250, 400, 315, step=5)
    n_avg = c3.select_slider("averages", options=[50, 100, 200, 500, 1000, 2000], value=500)
    include_y = c4.toggle("include hot y mode", value=True)
    seed = st.number_input("seed", min_value=0, value=0, step=1)

    try:
        config, noisy, clean, results = run_thermometry(float(n_true), float(delta_khz), int(n_avg), include_y, int(seed))
    except LevicoolError as e:
        st.error(f"Analysis failed: {e}")
        st.stop()

    render_spectrum(noisy, clean, config.cavity.kappa, config.drive.detuning)

    st.divider()
    render_methods(results, n_true)

    with st.expander("Method notes", expanded=False):
        st.markdown(
            """
- The joint fit models shot noise (1) plus a Lorentzian pair for x and, optionally, for y.
- The masked fit drops bins within five y linewidths of the y frequency and fits x alone.
- Band areas integrate the floor-subtracted PSD on both sides; the worst-case band (250-300 kHz)
  includes the y mode and therefore over-estimates n.
- σ_n includes the cavity linewidth and detuning uncertainties; σ_n (stat) is fit noise only.
            """.strip()
        )


if __name__ == "__main__":
    render_page()
