from __future__ import annotations

import matplotlib.pyplot as plt
import numpy as np
import streamlit as st

from core.constants import MBAR_TO_PA
from core.decohere import FreeFallReport


def make_expansion_fig(plan: FreeFallReport) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(8, 4))
    t_end = max(plan.tau_target, plan.t_max_bb, plan.t_max) * 1.5
    t = np.logspace(np.log10(max(plan.t_max / 100, 1e-9)), np.log10(t_end), 300)
    ax.loglog(t * 1e3, plan.expansion_sigma(t) * 1e9, color="#4C78A8", label="σ(t) free expansion")
    ax.axhline(plan.target_sigma * 1e9, color="black", ls="--", lw=1, label="target σ")
    ax.axvline(plan.tau_target * 1e3, color="black", lw=0.8)
    ax.axvline(plan.t_max * 1e3, color="#E15759", lw=1, label="t_max (trap heating)")
    if np.isfinite(plan.t_max_bb):
        ax.axvline(plan.t_max_bb * 1e3, color="#F28E2B", lw=1, label="t_max (blackbody)")
    ax.set_xlabel("time after release (ms)")
    ax.set_ylabel("wavepacket size (nm)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="upper left")
    fig.tight_layout()
    return fig


def render_free_fall(plan: FreeFallReport) -> None:
    st.subheader("Wavepacket expansion")
    st.pyplot(make_expansion_fig(plan), clear_figure=True)

    c1, c2, c3, c4 = st.columns(4)
    c1.metric("t_max", f"{plan.t_max * 1e6:.2f} μs")
    c2.metric("ξ_max", f"{plan.xi_max * 1e12:.1f} pm")
    c3.metric("τ to target", f"{plan.tau_target * 1e3:.1f} ms")
    c4.metric("required p", f"{plan.required_pressure / MBAR_TO_PA:.2g} mbar")

    st.write(
        f"Saturated gas decoherence Γ_sat = {plan.Gamma_sat / 1e6:.2f} MHz; reaching the target needs a rate "
        f"below {plan.required_rate:.1f} Hz, i.e. a pressure reduction by {plan.reduction_factor:.2g}."
    )
    if plan.blackbody_dominates:
        st.warning("At the required pressure blackbody radiation, not gas, limits the coherence.")
    st.info(plan.cryogenic_note)
