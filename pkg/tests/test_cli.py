import argparse
import json

import pytest

from cli import parse_grid, parse_range, run
from core.constants import PAPER_DEFAULTS_PATH
from core.decohere import free_fall_plan


@pytest.fixture
def out(tmp_path):
    return tmp_path / "out"


def _report(out, command):
    return json.loads((out / f"{command}_report.json").read_text(encoding="utf-8"))


def test_help_and_usage_errors():
    assert run(["--help"]) == 0
    assert run(["--bogus"]) == 2
    assert run([]) == 2
    assert run(["fit"]) == 2


def test_missing_config_exits_with_config_code(tmp_path, out):
    assert run(["--config", str(tmp_path / "nope.json"), "--out", str(out), "budget"]) == 2


def test_budget(out):
    assert run(["--out", str(out), "budget"]) == 0
    assert (out / "budget.csv").exists()
    report = _report(out, "budget")
    assert report["command"] == "budget"
    assert set(report["results"]["axes_hz"]) == {"x", "y", "z"}
    assert "config" in report["input_hashes"]


def test_decohere(out):
    assert run(["--out", str(out), "decohere", "--target-sigma", "5e-8"]) == 0
    plan = _report(out, "decohere")["results"]["free_fall"]
    assert plan["target_sigma"] == pytest.approx(5e-8)


def test_report_passes(out):
    assert run(["--out", str(out), "--seed", "0", "report"]) == 0
    assert (out / "acceptance.csv").exists()
    assert _report(out, "report")["results"]["acceptance"]


def test_simulate_then_fit(out):
    assert run(["--out", str(out), "--seed", "5", "simulate", "--n", "0.43"]) == 0
    spectrum = out / "spectrum.csv"
    assert spectrum.exists()
    assert run(["--out", str(out), "--format", "json", "fit", "--in", str(spectrum)]) == 0
    rows = json.loads((out / "occupation.json").read_text(encoding="utf-8"))
    assert {r["method"] for r in rows} == {"joint_fit", "masked_fit", "band_power", "worst_case"}
    joint = _report(out, "fit")["results"]["joint_fit"]
    assert abs(joint["n"] - 0.43) <= 3 * joint["sigma_n"]


def test_kappa_from_synthetic_scans(out):
    assert run(["--out", str(out), "kappa", "--synthetic", "5"]) == 0
    assert len(list((out / "scans").glob("*.csv"))) == 5
    results = _report(out, "kappa")["results"]
    assert results["kappa_hz"] == pytest.approx(193e3, abs=4e3)
    assert results["finesse"] == pytest.approx(72638, rel=0.03)


def test_kappa_needs_input(out):
    assert run(["--out", str(out), "kappa"]) == 1


def test_sweep_json(out):
    assert run(["--out", str(out), "--format", "json", "sweep", "--delta", "295000:315000:10000"]) == 0
    sweep = json.loads((out / "sweep.json").read_text(encoding="utf-8"))
    assert sweep["delta_hz"] == pytest.approx([295e3, 305e3, 315e3])
    assert _report(out, "sweep")["results"]["unstable"] == 0


def test_argument_parsers():
    assert parse_range("7e-7:1.3e-6") == (7e-7, 1.3e-6)
    assert parse_grid("0:10:5").tolist() == [0.0, 5.0, 10.0]
    with pytest.raises(argparse.ArgumentTypeError):
        parse_range("1:0")


def test_shared_flags_after_subcommand(out):
    args = [
        "sweep",
        "--config", str(PAPER_DEFAULTS_PATH),
        "--pressure", "0.7e-6:1.3e-6",
        "--delta", "305000:315000:10000",
        "--out", str(out),
        "--format", "json",
    ]
    assert run(args) == 0
    assert (out / "sweep.json").exists()


def test_flags_before_subcommand_are_kept(out):
    assert run(["--seed", "7", "--out", str(out), "decohere"]) == 0
    assert _report(out, "decohere")["seed"] == 7
    assert run(["--seed", "7", "decohere", "--seed", "9", "--out", str(out)]) == 0
    assert _report(out, "decohere")["seed"] == 9


def test_unreachable_rate_is_written_as_null(out, paper_config):
    x_zpf = free_fall_plan(paper_config).x_zpf
    assert run(["--out", str(out), "decohere", "--target-sigma", repr(x_zpf)]) == 0
    text = (out / "decohere_report.json").read_text(encoding="utf-8")
    assert "Infinity" not in text
    assert json.loads(text)["results"]["free_fall"]["required_rate"] is None


def test_shotnoise_scan(out):
    assert run(["--out", str(out), "shotnoise"]) == 0
    assert (out / "shot_noise.csv").exists()
    assert _report(out, "shotnoise")["results"]["verdict"]["linear"] is True
    assert run(["shotnoise", "--out", str(out), "--quadratic", "0.1", "--lo-powers", "1e-4,2e-4,3e-4,4e-4"]) == 0
    report = _report(out, "shotnoise")
    assert report["results"]["verdict"]["linear"] is False
    assert report["results"]["points"] == 4
