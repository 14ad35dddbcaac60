import sys
from pathlib import Path

import numpy as np

SRC_DIR = Path(__file__).resolve().parents[1] / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

from core.cavity import synthesize_classical_noise, synthesize_scans
from core.config import load_config
from core.constants import PROCESSED_DIR, TWO_PI
from core.cooling import detuning_sweep
from core.data import write_json, write_psd_csv, write_scan_csv, write_sweep_csv
from core.report import reproduce_paper
from core.specgen import config_grid, heterodyne_model, spectrum_params_from_config, synthesize_spectrum

SEED = 0
N_SCANS = 26  # same count as the measured transmission scans
DEMO_OCCUPATIONS = [0.1, 0.43, 1.0, 5.0]

OUT_DIR = PROCESSED_DIR / "demo"

config = load_config()
rng = np.random.default_rng(SEED)
het = config.heterodyne

# heterodyne spectra, x only and with the hot y mode
for n in DEMO_OCCUPATIONS:
    for include_y in (False, True):
        params = spectrum_params_from_config(config, n, include_y=include_y)
        clean = heterodyne_model(params, config_grid(config))
        noisy = synthesize_spectrum(clean, het.n_avg, rng, het_freq=config.drive.het_freq)
        tag = "xy" if include_y else "x"
        write_psd_csv(noisy, OUT_DIR / "spectra" / f"spectrum_n{n:g}_{tag}.csv")

# classical-noise floor for the detuning estimate (strong noise so the asymmetry shows)
wide = np.linspace(-1.5e6, 1.5e6, 3001) * TWO_PI
floor = synthesize_classical_noise(
    config.cavity.kappa, config.drive.detuning, wide, level=50.0, n_avg=het.n_avg, rng=rng
)
write_psd_csv(floor, OUT_DIR / "classical_floor.csv")

# transmission scans
for scan in synthesize_scans(config.cavity.kappa, N_SCANS, rng, noise=0.02, fsr=config.cavity.fsr):
    write_scan_csv(scan, OUT_DIR / "scans" / f"{scan.scan_id}.csv")

# detuning sweep over the measured pressure range
omega_hz = config.trap.omega_x / TWO_PI
grid = np.arange(omega_hz - 200e3, omega_hz + 200e3 + 1.0, 5e3)
sweep = detuning_sweep(config, TWO_PI * grid, workers=4)
write_sweep_csv(sweep, OUT_DIR / "sweep.csv")

report = reproduce_paper(config, SEED)
write_json(report.to_dict(), OUT_DIR / "report.json")

failed = report.failed_rows()
print(f"wrote demo data to {OUT_DIR} ({len(failed)} failed acceptance rows)")
