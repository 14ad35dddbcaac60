"""
levicool command line.

    python src/cli.py report
    python src/cli.py sweep --pressure 0.7e-6:1.3e-6
    python src/cli.py simulate --n 1 && python src/cli.py fit --in data/processed/spectrum.csv

Artifacts go to --out (default: $LEVICOOL_OUT or data/processed). Every command also writes
<command>_report.json.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from core.budget import AXES, axis_heating, total_budget
from core.cavity import estimate_detuning, fit_linewidth, synthesize_scans
from core.config import ExperimentConfig, dump_config, load_config
from core.constants import MBAR_TO_PA, PAPER_DEFAULTS_PATH, TWO_PI, default_out_dir
from core.cooling import build_linear_model, detuning_sweep
from core.data import (
    file_sha256,
    read_psd_csv,
    read_scan_csv,
    write_json,
    write_psd_csv,
    write_scan_csv,
    write_sweep_csv,
    write_time_trace,
)
from core.decohere import free_fall_plan
from core.errors import DomainError, LevicoolError
from core.report import RunReport, acceptance_frame, check_acceptance, reproduce_paper
from core.specgen import (
    config_grid,
    heterodyne_model,
    simulate_langevin,
    spectrum_params_from_config,
    synthesize_spectrum,
    welch_psd,
)
from core.thermo import analyze_spectrum, shot_noise_scan

logger = logging.getLogger("levicool")

COMMANDS = ("simulate", "fit", "kappa", "detuning", "budget", "sweep", "shotnoise", "decohere", "report")


# ---------------------------------------------------------------------------
# argument helpers


def parse_range(text: str) -> tuple[float, float]:
    """'lo:hi' -> (lo, hi)."""
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from exc
    if not 0 < lo <= hi:
        raise argparse.ArgumentTypeError(f"range must satisfy 0 < lo <= hi, got {text!r}")
    return lo, hi


def parse_grid(text: str) -> np.ndarray:
    """'start:stop:step' in Hz, stop included."""
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}") from exc
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    return np.arange(start, stop + 0.5 * step, step)


def parse_list(text: str) -> list[float]:
    """'a,b,c' -> [a, b, c]."""
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc
    if any(v < 0 for v in values):
        raise argparse.ArgumentTypeError(f"values must be >= 0, got {text!r}")
    return values


def _common_options(sub: bool) -> argparse.ArgumentParser:
    """Flags accepted before or after the subcommand."""

    def default(value):
        return argparse.SUPPRESS if sub else value

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=default(PAPER_DEFAULTS_PATH), help="experiment config (JSON)")
    common.add_argument("--out", type=Path, default=default(None), help="output directory (default $LEVICOOL_OUT)")
    common.add_argument("--seed", type=int, default=default(0))
    common.add_argument(
        "--format", choices=("csv", "json"), default=default("csv"), help="format of table artifacts"
    )
    common.add_argument("--workers", type=int, default=default(1))
    common.add_argument("-v", "--verbose", action="store_true", default=default(False))
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levicool",
        description="Cavity cooling and sideband thermometry toolkit",
        parents=[_common_options(sub=False)],
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="{" + ",".join(COMMANDS) + "}")
    common = [_common_options(sub=True)]

    p = sub.add_parser("simulate", parents=common, help="synthesize a heterodyne spectrum (Lorentzian model or Langevin trace)")
    p.add_argument("--n", type=float, default=None, help="x occupation for the Lorentzian model")
    p.add_argument("--n-avg", type=int, default=None)
    p.add_argument("--include-y", action="store_true")
    p.add_argument("--classical-level", type=float, default=0.0)
    p.add_argument("--langevin", action="store_true", help="time-domain simulation of the linear model")
    p.add_argument("--duration", type=float, default=0.2, help="trace length in s (langevin)")
    p.add_argument("--segment", type=int, default=8192, help="Welch segment length (langevin)")
    p.add_argument("--window", choices=("hann", "rectangular"), default="hann")

    p = sub.add_parser("fit", parents=common, help="occupation from a spectrum by every method")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--include-y", action="store_true")
    p.add_argument("--n-guess", type=float, default=None)

    p = sub.add_parser("kappa", parents=common, help="cavity linewidth from transmission scans")
    p.add_argument("--in", dest="inputs", type=Path, nargs="*", default=[])
    p.add_argument("--synthetic", type=int, default=0, help="fit N synthetic scans instead")
    p.add_argument("--noise", type=float, default=0.02)

    p = sub.add_parser("detuning", parents=common, help="detuning from the classical-noise floor asymmetry")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--band", type=parse_range, default=None, help="lo:hi in Hz (default: heterodyne band)")

    sub.add_parser("budget", parents=common, help="itemised heating and noise budget")

    p = sub.add_parser("sweep", parents=common, help="predicted occupation band over detuning")
    p.add_argument("--pressure", type=parse_range, default=None, help="lo:hi in mbar")
    p.add_argument("--delta", type=parse_grid, default=None, help="start:stop:step in Hz")

    p = sub.add_parser("shotnoise", parents=common, help="band power against LO power, linearity check")
    p.add_argument("--lo-powers", type=parse_list, default=None, help="LO powers in W, comma-separated")
    p.add_argument("--n-avg", type=int, default=None, help="noiseless traces when omitted")
    p.add_argument("--quadratic", type=float, default=0.0, help="classical term growing as P^2, shot-floor units")

    p = sub.add_parser("decohere", parents=common, help="free-fall coherence forecast")
    p.add_argument("--target-sigma", type=float, default=None, help="target wavepacket size in m")

    sub.add_parser("report", parents=common, help="reproduce the published numbers and check them")
    return parser


# ---------------------------------------------------------------------------
# commands


def _table(df: pd.DataFrame, out: Path, name: str, fmt: str) -> Path:
    if fmt == "csv":
        path = out / f"{name}.csv"
        df.to_csv(path, index=False, float_format="%.17g")
        return path
    return write_json(df.to_dict(orient="records"), out / f"{name}.json")


def cmd_simulate(args, config: ExperimentConfig, out: Path) -> RunReport:
    n_avg = args.n_avg or config.heterodyne.n_avg
    rng = np.random.default_rng(args.seed)
    results = {}
    if args.langevin:
        model = build_linear_model(config)
        dt = 0.05 * min(TWO_PI / model.omega, TWO_PI / model.kappa)
        trace = simulate_langevin(model, dt, args.duration, args.seed)
        write_time_trace(trace, out / "trace.bin")
        psd = welch_psd(trace, args.segment, args.window)
        psd = replace(psd, het_freq=config.drive.het_freq)
        results["model_hash"] = trace.model_hash
    else:
        n_x = config.free_fall.n_bar if args.n is None else args.n
        params = spectrum_params_from_config(
            config, n_x, include_y=args.include_y, classical_level=args.classical_level
        )
        clean = heterodyne_model(params, config_grid(config))
        psd = synthesize_spectrum(clean, n_avg, rng, het_freq=config.drive.het_freq)
        results["n_true"] = n_x
    path = write_psd_csv(psd, out / "spectrum.csv")
    results.update(spectrum=str(path), n_avg=psd.n_avg, bins=int(psd.freq.size))
    return RunReport("simulate", seed=args.seed, results=results)


def cmd_fit(args, config: ExperimentConfig, out: Path) -> RunReport:
    psd = read_psd_csv(args.input)
    occ = analyze_spectrum(psd, config, include_y=args.include_y, n_guess=args.n_guess)
    rows = pd.DataFrame([r.as_dict() for r in occ.values()])
    _table(rows[["method", "n", "sigma_n", "sigma_n_stat", "low_confidence"]], out, "occupation", args.format)
    return RunReport(
        "fit",
        seed=args.seed,
        input_hashes={str(args.input): file_sha256(args.input)},
        results={name: r.as_dict() for name, r in occ.items()},
    )


def cmd_kappa(args, config: ExperimentConfig, out: Path) -> RunReport:
    hashes = {}
    if args.inputs:
        scans = [read_scan_csv(p) for p in args.inputs]
        hashes = {str(p): file_sha256(p) for p in args.inputs}
    elif args.synthetic > 0:
        rng = np.random.default_rng(args.seed)
        scans = synthesize_scans(config.cavity.kappa, args.synthetic, rng, noise=args.noise, fsr=config.cavity.fsr)
        for scan in scans:
            write_scan_csv(scan, out / "scans" / f"{scan.scan_id}.csv")
    else:
        raise DomainError("kappa needs --in scan files or --synthetic N")
    fit = fit_linewidth(scans)
    results = {
        "kappa_hz": fit.kappa / TWO_PI,
        "kappa_sigma_hz": fit.sigma / TWO_PI,
        "fsr_hz": None if fit.fsr is None else fit.fsr / TWO_PI,
        "finesse": fit.finesse,
        "n_scans": len(scans),
        "per_scan_hz": (fit.per_scan / TWO_PI).tolist(),
    }
    return RunReport("kappa", seed=args.seed, input_hashes=hashes, results=results)


def cmd_detuning(args, config: ExperimentConfig, out: Path) -> RunReport:
    psd = read_psd_csv(args.input)
    het = config.heterodyne
    band = (het.band_lo, het.band_hi) if args.band is None else (TWO_PI * args.band[0], TWO_PI * args.band[1])
    est = estimate_detuning(psd, band, config.cavity.kappa)
    results = {
        "delta_hz": est.delta / TWO_PI,
        "sigma_hz": est.sigma / TWO_PI,
        "good": est.good,
        "low_confidence": est.low_confidence,
        "n_bins": est.n_bins,
    }
    return RunReport("detuning", seed=args.seed, input_hashes={str(args.input): file_sha256(args.input)}, results=results)


def cmd_budget(args, config: ExperimentConfig, out: Path) -> RunReport:
    budget = total_budget(config)
    items = budget.as_report()
    table = pd.DataFrame([{"item": k, **v} for k, v in items.items()])
    _table(table, out, "budget", args.format)
    axes = {}
    for axis in AXES:
        rates = axis_heating(config, axis)
        axes[axis] = {k: (v / TWO_PI if k != "axis" else v) for k, v in rates.items()}
    return RunReport("budget", seed=args.seed, results={"budget": items, "axes_hz": axes})


def cmd_sweep(args, config: ExperimentConfig, out: Path) -> RunReport:
    if args.delta is None:
        omega_x = config.trap.omega_x / TWO_PI
        grid_hz = np.arange(omega_x - 200e3, omega_x + 200e3 + 1.0, 5e3)
    else:
        grid_hz = args.delta
    if args.pressure is None:
        pressure = None
    else:
        pressure = (args.pressure[0] * MBAR_TO_PA, args.pressure[1] * MBAR_TO_PA)
    df = detuning_sweep(config, TWO_PI * grid_hz, pressure, workers=args.workers)
    if args.format == "csv":
        write_sweep_csv(df, out / "sweep.csv")
    else:
        write_json(df.to_dict(orient="list"), out / "sweep.json")
    best = df.loc[df["n_low"].idxmin()] if df["n_low"].notna().any() else None
    results = {
        "points": len(df),
        "unstable": int((~df["stable_flag"]).sum()),
        "best_delta_hz": None if best is None else float(best["delta_hz"]),
        "best_n_low": None if best is None else float(best["n_low"]),
    }
    return RunReport("sweep", seed=args.seed, results=results)


def cmd_shotnoise(args, config: ExperimentConfig, out: Path) -> RunReport:
    points, verdict = shot_noise_scan(
        config, args.lo_powers, n_avg=args.n_avg, seed=args.seed, quadratic=args.quadratic
    )
    table = pd.DataFrame(points, columns=["lo_power_w", "band_power"])
    _table(table, out, "shot_noise", args.format)
    return RunReport("shotnoise", seed=args.seed, results={"verdict": asdict(verdict), "points": len(points)})


def cmd_decohere(args, config: ExperimentConfig, out: Path) -> RunReport:
    plan = free_fall_plan(config, args.target_sigma)
    return RunReport("decohere", seed=args.seed, results={"free_fall": plan.as_report()})


def cmd_report(args, config: ExperimentConfig, out: Path) -> RunReport:
    report = reproduce_paper(config, args.seed)
    _table(acceptance_frame(report), out, "acceptance", args.format)
    return report


HANDLERS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "kappa": cmd_kappa,
    "detuning": cmd_detuning,
    "budget": cmd_budget,
    "sweep": cmd_sweep,
    "shotnoise": cmd_shotnoise,
    "decohere": cmd_decohere,
    "report": cmd_report,
}


# ---------------------------------------------------------------------------
# entry point


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help exits 0, usage errors exit 2
        return int(exc.code or 0)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        config = load_config(args.config)
        out = default_out_dir() if args.out is None else args.out
        out.mkdir(parents=True, exist_ok=True)
        report = HANDLERS[args.command](args, config, out)
        if not report.config:
            report.config = dump_config(config)
        report.input_hashes.setdefault("config", file_sha256(args.config))
        path = write_json(report.to_dict(), out / f"{args.command}_report.json")
        logger.info("wrote %s", path)
        if args.command == "report":
            check_acceptance(report)
    except LevicoolError as exc:
        # ConfigError carries exit code 2
        print(f"levicool: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
