from __future__ import annotations

from pathlib import Path
import streamlit as st
import sys

SRC_DIR = Path(__file__).resolve().parent
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

from core.config import ExperimentConfig, load_config
from core.constants import PAPER_DEFAULTS_PATH
from core.errors import LevicoolError
from core.report import RunReport, reproduce_paper
from visualisations.Overview import render_acceptance_table, render_headline_numbers


@st.cache_data(show_spinner=False)
def load_experiment(path: Path = PAPER_DEFAULTS_PATH) -> ExperimentConfig:
    return load_config(path)


@st.cache_data(show_spinner="Recomputing the published numbers...")
def load_report(_config: ExperimentConfig, seed: int = 0) -> RunReport:
    return reproduce_paper(_config, seed)


st.set_page_config(page_title="levicool Overview", layout="wide")

st.title("Ground-state cooling of a levitated nanoparticle")
st.write(
    "A 143 nm silica sphere held in an optical tweezer inside a high-finesse cavity. Light the particle "
    "scatters into the cavity removes energy from its motion (coherent-scattering cavity cooling)."
)
st.write(
    "This dashboard recomputes the cooling theory, the heterodyne sideband thermometry and the "
    "heating budget from a single parameter file, and checks the results against the published values."
)

st.divider()

try:
    config = load_experiment()
    report = load_report(config)
except LevicoolError as e:
    st.error(f"Failed to build the report: {e}")
    st.stop()

render_headline_numbers(config, report)
st.divider()
render_acceptance_table(report)
