import pytest

from core.constants import PAPER_ANCHORS
from core.errors import AcceptanceError
from core.report import (
    RunReport,
    acceptance_frame,
    acceptance_row,
    check_acceptance,
    closed_loop_thermometry,
    reproduce_paper,
    shot_noise_rows,
)


@pytest.fixture(scope="module")
def report(paper_config):
    return reproduce_paper(paper_config, seed=0)


def test_every_published_value_is_reproduced(report):
    assert report.failed_rows() == []
    check_acceptance(report)
    names = [row["name"] for row in report.results["acceptance"]]
    assert names == list(PAPER_ANCHORS) + ["closed_loop_n", "shot_noise_linear", "shot_noise_excess_rejected"]


def test_report_sections(report):
    assert report.command == "report"
    assert report.seed == 0
    assert set(report.results) == {"acceptance", "budget", "free_fall"}
    assert report.config["cavity"]["kappa_hz"] == pytest.approx(193e3)
    assert len(report.input_hashes["config"]) == 16


def test_report_json_round_trip(report):
    again = RunReport.from_json(report.to_json())
    assert again.to_dict() == report.to_dict()


def test_acceptance_frame_columns(report):
    df = acceptance_frame(report)
    assert list(df.columns) == ["name", "computed", "expected", "tolerance", "kind", "passed"]
    assert df["passed"].all()


@pytest.mark.parametrize(
    "name, value, passed",
    [
        ("n_min", 0.0252, True),
        ("n_min", 0.027, False),
        ("x_zpf_pm", 3.15, True),
        ("required_pressure_mbar", 2.9e-11, True),
        ("required_pressure_mbar", 4e-11, False),
        ("t_max_us", float("nan"), False),
    ],
)
def test_acceptance_row_tolerance_kinds(name, value, passed):
    assert acceptance_row(name, value)["passed"] is passed


def test_failed_rows_raise():
    bad = RunReport("report", results={"acceptance": [{"name": "n_min", "passed": False}]})
    with pytest.raises(AcceptanceError) as info:
        check_acceptance(bad)
    assert info.value.failed_rows == ["n_min"]


def test_closed_loop_thermometry(paper_config):
    row = closed_loop_thermometry(paper_config, 0.43, 500, 3)
    assert row["passed"]
    assert row["sigma_n"] <= 0.05


@pytest.mark.parametrize("n_true", [0.1, 0.43, 1.0, 5.0, 50.0])
def test_closed_loop_recovers_occupation(paper_config, n_true):
    row = closed_loop_thermometry(paper_config, n_true, 2000, 17)
    assert row["passed"]
    assert row["expected"] == n_true
    assert abs(row["computed"] - n_true) <= 3.0 * row["sigma_n"]


def test_shot_noise_rows(paper_config):
    rows = {row["name"]: row for row in shot_noise_rows(paper_config)}
    assert rows["shot_noise_linear"]["computed"] is True
    assert rows["shot_noise_excess_rejected"]["computed"] is False
    assert all(row["passed"] for row in rows.values())
    assert rows["shot_noise_linear"]["r2"] == pytest.approx(1.0)


def test_shot_noise_rows_need_lo_power(paper_config):
    from core.errors import DomainError

    with pytest.raises(DomainError):
        shot_noise_rows(paper_config.with_updates("drive", lo_power=0.0))
