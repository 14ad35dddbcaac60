from __future__ import annotations

import streamlit as st

from core.config import load_config
from core.decohere import free_fall_plan
from core.errors import LevicoolError
from visualisations.free_fall import render_free_fall


@st.cache_data(show_spinner=False)
def load_experiment():
    return load_config()


def render_page() -> None:
    st.set_page_config(page_title="Free Fall", layout="wide")

    st.title("Free Fall and Decoherence")
    st.write(
        "Switching the trap off lets the ground-state wavepacket expand. How far it gets before the "
        "environment localizes it again depends on the heating rates measured in the trap."
    )

    try:
        config = load_experiment()
    except LevicoolError as e:
        st.error(f"Failed to load config: {e}")
        st.stop()

    target_nm = st.slider(
        "target wavepacket size (nm)",
        min_value=1.0,
        max_value=500.0,
        value=round(config.particle.radius * 1e9, 1),
        help="Defaults to the particle radius.",
    )

    try:
        plan = free_fall_plan(config, target_nm * 1e-9)
    except LevicoolError as e:
        st.error(str(e))
        st.stop()

    render_free_fall(plan)

    with st.expander("Blackbody limit", expanded=False):
        st.write(
            f"Blackbody localization Λ_bb = {plan.Lambda_bb:.3g} Hz/m² (scattering {plan.Lambda_bb_sc:.2g}, "
            f"emission {plan.Lambda_bb_e:.2g}, absorption {plan.Lambda_bb_a:.2g}) gives "
            f"t_max = {plan.t_max_bb * 1e3:.2f} ms and ξ_max = {plan.xi_max_bb * 1e9:.1f} nm."
        )


if __name__ == "__main__":
    render_page()
