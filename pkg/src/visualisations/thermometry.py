from __future__ import annotations

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import streamlit as st

from core.cavity import cavity_response
from core.constants import TWO_PI
from core.specgen import PsdTrace
from core.thermo import OccupationResult

METHOD_LABELS = {
    "joint_fit": "Joint x+y fit",
    "masked_fit": "x fit, y masked",
    "band_power": "Band areas",
    "worst_case": "Worst case (250-300 kHz)",
    "rate_ratio": "Heating / damping",
}


def make_spectrum_fig(psd: PsdTrace, model: PsdTrace | None, kappa: float, delta: float) -> plt.Figure:
    """Both sidebands folded onto |offset| with the cavity envelope on a twin axis."""
    fig, ax = plt.subplots(figsize=(9, 4))
    khz = psd.freq / TWO_PI / 1e3
    pos, neg = psd.freq > 0, psd.freq < 0

    ax.plot(khz[pos], psd.psd[pos], lw=0.6, color="#E15759", alpha=0.7, label="anti-Stokes (+)")
    ax.plot(-khz[neg], psd.psd[neg], lw=0.6, color="#4C78A8", alpha=0.7, label="Stokes (−)")
    if model is not None:
        mk = model.freq / TWO_PI / 1e3
        ax.plot(mk[model.freq > 0], model.psd[model.freq > 0], color="#E15759", lw=1.5)
        ax.plot(-mk[model.freq < 0], model.psd[model.freq < 0], color="#4C78A8", lw=1.5)

    ax.set_xlabel("|offset from heterodyne carrier| (kHz)")
    ax.set_ylabel("PSD (shot-noise units)")
    ax.grid(True, alpha=0.3)

    env = ax.twinx()
    grid = np.linspace(0, np.abs(psd.freq).max(), 400)
    env.plot(grid / TWO_PI / 1e3, cavity_response(kappa, delta, grid), "--", color="grey", lw=1)
    env.plot(grid / TWO_PI / 1e3, cavity_response(kappa, delta, -grid), ":", color="grey", lw=1)
    env.set_ylabel("cavity response T")
    env.set_ylim(0, 1.05)

    ax.legend(loc="upper right")
    fig.tight_layout()
    return fig


def make_methods_fig(results: dict[str, OccupationResult], n_true: float | None = None) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(7, 3))
    names = list(results)
    ns = [results[k].n for k in names]
    errs = [results[k].sigma_n if np.isfinite(results[k].sigma_n) else 0.0 for k in names]
    y = np.arange(len(names))
    ax.errorbar(ns, y, xerr=errs, fmt="o", capsize=3)
    if n_true is not None:
        ax.axvline(n_true, color="black", lw=1, ls="--", label="true n")
        ax.legend()
    ax.axvline(1.0, color="#E15759", lw=0.8, alpha=0.6)
    ax.set_yticks(y)
    ax.set_yticklabels([METHOD_LABELS.get(k, k) for k in names])
    ax.set_xlabel("phonon occupation n_x")
    ax.grid(True, axis="x", alpha=0.3)
    fig.tight_layout()
    return fig


def results_table(results: dict[str, OccupationResult]) -> pd.DataFrame:
    rows = [
        {
            "method": METHOD_LABELS.get(k, k),
            "n": r.n,
            "σ_n": r.sigma_n,
            "σ_n (stat)": r.sigma_n_stat,
            "low confidence": r.low_confidence,
        }
        for k, r in results.items()
    ]
    return pd.DataFrame(rows)


def render_spectrum(psd: PsdTrace, model: PsdTrace | None, kappa: float, delta: float) -> None:
    st.subheader("Heterodyne spectrum")
    fig = make_spectrum_fig(psd, model, kappa, delta)
    st.pyplot(fig, clear_figure=True)
    st.caption(
        "Dashed: cavity response at the anti-Stokes offset, dotted: at the Stokes offset. "
        "The anti-Stokes line is enhanced by the cavity, so the raw ratio must be corrected before it means anything."
    )


def render_methods(results: dict[str, OccupationResult], n_true: float | None = None) -> None:
    st.subheader("Occupation by method")
    st.pyplot(make_methods_fig(results, n_true), clear_figure=True)
    st.dataframe(results_table(results), use_container_width=True, hide_index=True)
    flagged = [METHOD_LABELS.get(k, k) for k, r in results.items() if r.low_confidence]
    if flagged:
        st.warning(f"Low-confidence estimates: {', '.join(flagged)}")
