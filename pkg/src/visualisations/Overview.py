import pandas as pd
import streamlit as st

from core.constants import TWO_PI
from core.physpar import occupation_temperature
from core.report import RunReport, acceptance_frame


def _kpi_row(tiles: list[tuple[str, str]], highlight: str | None = None) -> None:
    # lightweight "kpi tiles" using HTML so Streamlit spacing doesn't look weird
    cols = st.columns(len(tiles))
    for col, (label, value) in zip(cols, tiles):
        with col:
            colour = "#ff4d4f" if label == highlight else "black"
            st.markdown(
                f"""
                <div style="line-height:1.0; margin-top:0.25rem;">
                  <div style="font-weight:300; font-size:1.1rem; margin-bottom:0.2rem;">{label}</div>
                  <div style="font-weight:300; font-size:2.4rem; color:{colour}; margin:0;">{value}</div>
                </div>
                """,
                unsafe_allow_html=True,
            )


def headline_numbers(config, report: RunReport) -> list[tuple[str, str]]:
    n = config.free_fall.n_bar
    T, p0 = occupation_temperature(n, config.trap.omega_x)
    rows = {r["name"]: r for r in report.results.get("acceptance", [])}
    coop = rows.get("cooperativity", {}).get("computed", float("nan"))
    heating = config.free_fall.heating_rate
    return [
        ("n_x", f"{n:.2f}"),
        ("T (μK)", f"{T * 1e6:.1f}"),
        ("P₀", f"{p0:.0%}"),
        ("C", f"{coop:.1f}"),
        ("Γ_x/2π (kHz)", "n/a" if heating is None else f"{heating / TWO_PI / 1e3:.1f}"),
    ]


def render_headline_numbers(config, report: RunReport) -> None:
    st.subheader("Headline numbers")
    _kpi_row(headline_numbers(config, report), highlight="n_x")
    st.caption("Occupation below one phonon: the x motion spends most of its time in the ground state.")


def _style_passed(row: pd.Series) -> list[str]:
    colour = "" if row["passed"] else "background-color: #ffd6d6"
    return [colour] * len(row)


def render_acceptance_table(report: RunReport) -> None:
    st.subheader("Published values, recomputed")
    df = acceptance_frame(report)
    if df.empty:
        st.info("No acceptance rows in this report.")
        return

    failed = report.failed_rows()
    if failed:
        st.error(f"{len(failed)} row(s) outside tolerance: {', '.join(failed)}")
    else:
        st.success(f"All {len(df)} rows within tolerance.")

    st.dataframe(df.style.apply(_style_passed, axis=1), use_container_width=True, hide_index=True)
