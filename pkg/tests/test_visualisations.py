import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import pytest  # noqa: E402

from core.budget import total_budget  # noqa: E402
from core.decohere import free_fall_plan  # noqa: E402
from core.specgen import config_grid, heterodyne_model, spectrum_params_from_config  # noqa: E402
from core.thermo import OccupationResult  # noqa: E402
from visualisations.cooling_budget import budget_table, make_budget_fig, make_sweep_fig  # noqa: E402
from visualisations.free_fall import make_expansion_fig  # noqa: E402
from visualisations.thermometry import make_methods_fig, make_spectrum_fig, results_table  # noqa: E402


@pytest.fixture(autouse=True)
def close_figures():
    yield
    plt.close("all")


def test_spectrum_figure(paper_config):
    psd = heterodyne_model(spectrum_params_from_config(paper_config, 0.43), config_grid(paper_config))
    fig = make_spectrum_fig(psd, psd, paper_config.cavity.kappa, paper_config.drive.detuning)
    assert len(fig.axes) == 2


def test_methods_figure_and_table():
    results = {
        "joint_fit": OccupationResult(0.43, 0.03, "joint_fit"),
        "band_power": OccupationResult(0.0, float("inf"), "band_power", low_confidence=True),
    }
    fig = make_methods_fig(results, n_true=0.43)
    assert fig.axes[0].get_yticklabels()[0].get_text() == "Joint x+y fit"
    table = results_table(results)
    assert table["low confidence"].tolist() == [False, True]


def test_sweep_figure_marks_unstable_points():
    df = pd.DataFrame(
        {"delta_hz": [2.95e5, 3.05e5], "n_low": [np.nan, 0.4], "n_high": [np.nan, 0.5], "n_ultimate": [np.nan, 0.1],
         "stable_flag": [False, True]}
    )
    fig = make_sweep_fig(df, 305e3, 0.43)
    assert fig.axes[0].get_yscale() == "log"


def test_budget_figure_and_table(paper_config):
    items = total_budget(paper_config).as_report()
    fig = make_budget_fig(items)
    assert len(fig.axes[0].patches) == 3
    assert "Gamma_total" in budget_table(items)["item"].tolist()


def test_expansion_figure(paper_config):
    fig = make_expansion_fig(free_fall_plan(paper_config))
    assert fig.axes[0].get_xscale() == "log"
