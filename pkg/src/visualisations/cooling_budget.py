from __future__ import annotations

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import streamlit as st

# budget items shown as bars (rates only, Hz/2pi)
RATE_ITEMS = ["Gamma_gas", "Gamma_rec", "Gamma_phase"]
RATE_LABELS = {
    "Gamma_gas": "gas",
    "Gamma_rec": "recoil",
    "Gamma_phase": "phase noise (bound)",
}


def make_sweep_fig(df: pd.DataFrame, omega_x_hz: float, n_measured: float | None = None) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(8, 4))
    khz = df["delta_hz"] / 1e3
    ax.fill_between(khz, df["n_low"], df["n_high"], color="#4C78A8", alpha=0.35, label="pressure range")
    ax.plot(khz, df["n_ultimate"], color="black", lw=1, ls="--", label="gas heating negligible")

    bad = ~df["stable_flag"]
    if bad.any():
        for d in khz[bad]:
            ax.axvspan(d - 1, d + 1, color="#E15759", alpha=0.2, lw=0)

    ax.axvline(omega_x_hz / 1e3, color="grey", lw=0.8)
    if n_measured is not None:
        ax.axhline(n_measured, color="#E15759", lw=1, label=f"n = {n_measured:g}")
    ax.set_yscale("log")
    ax.set_xlabel("detuning Δ/2π (kHz)")
    ax.set_ylabel("predicted n_x")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def make_budget_fig(items: dict[str, dict]) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(6, 3))
    names = [k for k in RATE_ITEMS if k in items]
    values = [items[k]["value"] / 1e3 for k in names]
    colours = ["#4C78A8" if items[k]["provenance"] != "pass-through" else "#BAB0AC" for k in names]
    ax.barh([RATE_LABELS[k] for k in names], values, color=colours)
    ax.set_xlabel("heating rate Γ/2π (kHz)")
    ax.grid(True, axis="x", alpha=0.3)
    fig.tight_layout()
    return fig


def budget_table(items: dict[str, dict]) -> pd.DataFrame:
    df = pd.DataFrame([{"item": k, **v} for k, v in items.items()])
    df["value"] = df["value"].map(lambda v: f"{v:.4g}" if np.isfinite(v) else "n/a")
    return df


def render_sweep(df: pd.DataFrame, omega_x_hz: float, n_measured: float | None = None) -> None:
    st.subheader("Occupation against detuning")
    st.pyplot(make_sweep_fig(df, omega_x_hz, n_measured), clear_figure=True)
    n_bad = int((~df["stable_flag"]).sum())
    if n_bad:
        st.warning(f"{n_bad} detuning(s) give an unstable linear model (heating side of the cavity).")


def render_budget(items: dict[str, dict]) -> None:
    st.subheader("Heating budget")
    left, right = st.columns([1, 1])
    with left:
        st.pyplot(make_budget_fig(items), clear_figure=True)
    with right:
        st.dataframe(budget_table(items), use_container_width=True, hide_index=True)
    st.caption("Grey bars are quoted bounds passed through unchanged, not computed.")
