## readers / writers for the files the toolkit exchanges

# src/core/data.py
from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from core.cavity import TransmissionScan
from core.constants import TWO_PI
from core.errors import DomainError
from core.specgen import PsdTrace, TimeTrace

logger = logging.getLogger(__name__)

TRACE_HEADER_BYTES = 80
SWEEP_COLUMNS = ["delta_hz", "n_low", "n_high", "n_ultimate", "stable_flag"]


# ---------------------------------------------------------------------------
# hashing


def fingerprint(*arrays, **params) -> str:
    """Short sha256 over array bytes plus sorted scalar parameters."""
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(np.asarray(a, dtype=float)).tobytes())
    if params:
        h.update(json.dumps(params, sort_keys=True, default=float).encode())
    return h.hexdigest()[:16]


def file_sha256(path: Path | str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# csv with "# key=value" metadata lines


def _read_meta(path: Path) -> dict[str, str]:
    meta = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            if key:
                meta[key.strip()] = value.strip()
    return meta


def _write_with_meta(df: pd.DataFrame, path: Path, meta: dict[str, object]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for key, value in meta.items():
            if value is not None:
                fh.write(f"# {key}={value}\n")
        df.to_csv(fh, index=False, float_format="%.17g")
    return path


def write_psd_csv(trace: PsdTrace, path: Path | str) -> Path:
    df = pd.DataFrame({"freq_hz": trace.freq / TWO_PI, "psd_sn_units": trace.psd})
    if trace.het_freq is not None:
        df["abs_freq_hz"] = trace.abs_freq / TWO_PI
    meta = {
        "n_avg": trace.n_avg,
        "rbw_hz": repr(trace.resolution_bw / TWO_PI),
        "het_freq_hz": None if trace.het_freq is None else repr(trace.het_freq / TWO_PI),
    }
    return _write_with_meta(df, path, meta)


def read_psd_csv(path: Path | str) -> PsdTrace:
    path = Path(path)
    meta = _read_meta(path)
    df = pd.read_csv(path, comment="#")
    if "freq_hz" not in df.columns or df.shape[1] < 2:
        raise DomainError(f"{path}: expected a freq_hz column and a value column")
    value_col = "psd_sn_units" if "psd_sn_units" in df.columns else df.columns[1]
    df = df.sort_values("freq_hz")
    n_avg = int(meta["n_avg"]) if "n_avg" in meta else None
    rbw = float(meta["rbw_hz"]) * TWO_PI if "rbw_hz" in meta else 0.0
    het = float(meta["het_freq_hz"]) * TWO_PI if "het_freq_hz" in meta else None
    return PsdTrace(
        freq=TWO_PI * df["freq_hz"].to_numpy(dtype=float),
        psd=df[value_col].to_numpy(dtype=float),
        n_avg=n_avg,
        resolution_bw=rbw,
        het_freq=het,
    )


def write_scan_csv(scan: TransmissionScan, path: Path | str) -> Path:
    df = pd.DataFrame({"freq_hz": scan.detuning_grid / TWO_PI, "value": scan.transmitted_power})
    meta = {"scan_id": scan.scan_id, "fsr_hz": None if scan.fsr is None else repr(scan.fsr / TWO_PI)}
    return _write_with_meta(df, path, meta)


def read_scan_csv(path: Path | str) -> TransmissionScan:
    path = Path(path)
    meta = _read_meta(path)
    df = pd.read_csv(path, comment="#")
    if "freq_hz" not in df.columns or df.shape[1] < 2:
        raise DomainError(f"{path}: expected freq_hz and value columns")
    value_col = "value" if "value" in df.columns else df.columns[1]
    fsr = float(meta["fsr_hz"]) * TWO_PI if "fsr_hz" in meta else None
    return TransmissionScan(
        detuning_grid=TWO_PI * df["freq_hz"].to_numpy(dtype=float),
        transmitted_power=df[value_col].to_numpy(dtype=float),
        scan_id=meta.get("scan_id", path.stem),
        fsr=fsr,
    )


def write_sweep_csv(df: pd.DataFrame, path: Path | str) -> Path:
    missing = [c for c in SWEEP_COLUMNS if c not in df.columns]
    if missing:
        raise DomainError(f"sweep table missing columns {missing}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df[SWEEP_COLUMNS].to_csv(path, index=False, float_format="%.17g")
    return path


def read_sweep_csv(path: Path | str) -> pd.DataFrame:
    df = pd.read_csv(path)
    df["stable_flag"] = df["stable_flag"].astype(str).str.strip().str.lower().eq("true")
    return df


# ---------------------------------------------------------------------------
# binary time traces: 80-byte json header, then interleaved little-endian float64 re/im


def write_time_trace(trace: TimeTrace, path: Path | str) -> Path:
    header = json.dumps(
        {"dt": trace.dt, "seed": trace.seed, "hash": trace.model_hash}, separators=(",", ":"), sort_keys=True
    ).encode("ascii")
    if len(header) > TRACE_HEADER_BYTES:
        raise DomainError(f"trace header is {len(header)} bytes, limit {TRACE_HEADER_BYTES}")
    samples = np.asarray(trace.samples, dtype=np.complex128)
    body = np.empty(2 * samples.size, dtype="<f8")
    body[0::2] = samples.real
    body[1::2] = samples.imag
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(header.ljust(TRACE_HEADER_BYTES, b" "))
        fh.write(body.tobytes())
    return path


def read_time_trace(path: Path | str) -> TimeTrace:
    raw = Path(path).read_bytes()
    if len(raw) < TRACE_HEADER_BYTES:
        raise DomainError(f"{path}: truncated trace header")
    try:
        header = json.loads(raw[:TRACE_HEADER_BYTES].decode("ascii").strip())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DomainError(f"{path}: unreadable trace header ({exc})") from exc
    body = np.frombuffer(raw[TRACE_HEADER_BYTES:], dtype="<f8")
    if body.size % 2:
        raise DomainError(f"{path}: odd number of float64 values in a complex trace")
    samples = body[0::2] + 1j * body[1::2]
    return TimeTrace(dt=float(header["dt"]), samples=samples, seed=header.get("seed"), model_hash=header.get("hash", ""))


# ---------------------------------------------------------------------------
# json


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        # inf and nan have no JSON literal
        return float(obj) if np.isfinite(obj) else None
    if isinstance(obj, pd.DataFrame):
        return to_jsonable(obj.to_dict(orient="list"))
    return obj


def write_json(obj, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
    return path


def read_json(path: Path | str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
