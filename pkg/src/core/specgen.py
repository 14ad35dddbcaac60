"""
Forward models of the heterodyne measurement.

Frequency axes are signed offsets from the heterodyne carrier in rad/s; anti-Stokes light
shows up at +Omega. PSDs are two-sided densities in shot-noise units (vacuum = 1).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Callable, Optional, Sequence

import numpy as np
from scipy import signal
from scipy.linalg import expm

from core.cavity import cavity_response
from core.cooling import LinearModel, steady_state_covariance
from core.errors import DomainError, InstabilityError, PreconditionError, require_positive
from core.constants import TWO_PI

if TYPE_CHECKING:
    from core.config import ExperimentConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PsdTrace:
    freq: np.ndarray
    psd: np.ndarray
    n_avg: Optional[int] = None  # None for analytic (noiseless) traces
    resolution_bw: float = 0.0
    het_freq: Optional[float] = None

    def __post_init__(self) -> None:
        freq = np.asarray(self.freq, dtype=float)
        psd = np.asarray(self.psd, dtype=float)
        if freq.shape != psd.shape or freq.ndim != 1:
            raise DomainError("freq and psd must be 1-D arrays of equal length")
        if freq.size > 1 and not np.all(np.diff(freq) > 0):
            raise DomainError("freq must be strictly increasing")
        if np.any(psd < 0):
            raise DomainError("psd must be non-negative")
        if self.n_avg is not None and self.n_avg < 1:
            raise DomainError(f"n_avg must be >= 1, got {self.n_avg}")
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "psd", psd)

    @property
    def bin_width(self) -> float:
        return float(np.median(np.diff(self.freq))) if self.freq.size > 1 else self.resolution_bw

    @property
    def abs_freq(self) -> Optional[np.ndarray]:
        return None if self.het_freq is None else self.het_freq + self.freq

    def sigma(self, model: Optional[np.ndarray] = None) -> np.ndarray:
        """Per-bin std S/sqrt(n_avg) of an averaged periodogram."""
        ref = self.psd if model is None else model
        return ref / np.sqrt(self.n_avg or 1)

    def select(self, lo: float, hi: float) -> np.ndarray:
        return (self.freq >= lo) & (self.freq <= hi)


@dataclass(frozen=True)
class ModeParams:
    omega: float
    gamma: float
    n_occ: float
    weight: float

    def __post_init__(self) -> None:
        require_positive(omega=self.omega, gamma=self.gamma)
        if self.n_occ < 0 or self.weight < 0:
            raise DomainError("n_occ and weight must be >= 0")


@dataclass(frozen=True)
class SpectrumModelParams:
    modes: tuple[ModeParams, ...]
    kappa: float
    delta: float
    classical_level: float = 0.0
    classical_floor: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)
    shot_floor: float = 1.0

    def __post_init__(self) -> None:
        require_positive(kappa=self.kappa)
        if self.shot_floor != 1.0:
            raise DomainError("shot floor is 1 by definition of shot-noise units")

    def amplitudes(self, mode: ModeParams) -> tuple[float, float]:
        """(a_S, a_AS): Stokes carries (n+1) T(delta,-Omega), anti-Stokes n T(delta,+Omega)."""
        t_as = float(cavity_response(self.kappa, self.delta, mode.omega))
        t_s = float(cavity_response(self.kappa, self.delta, -mode.omega))
        return mode.weight * (mode.n_occ + 1.0) * t_s, mode.weight * mode.n_occ * t_as

    @classmethod
    def from_linear_model(cls, model: LinearModel) -> "SpectrumModelParams":
        """Weak-coupling Lorentzian picture of a linear model: dressed frequency/damping, Lyapunov n."""
        _, n = steady_state_covariance(model)
        lam = model.mechanical_eigenvalue
        mode = ModeParams(
            omega=abs(lam.imag),
            gamma=-2.0 * lam.real,
            n_occ=n,
            weight=16.0 * model.g**2 / model.kappa,
        )
        return cls(modes=(mode,), kappa=model.kappa, delta=model.delta)


def lorentzian(x, gamma: float):
    hw = gamma / 2.0
    return hw / (np.asarray(x) ** 2 + hw**2)


def sideband_grid(band_lo: float, band_hi: float, bin_width: float) -> np.ndarray:
    """Symmetric two-sided grid covering -hi..-lo and lo..hi."""
    pos = np.arange(band_lo, band_hi + 0.5 * bin_width, bin_width)
    return np.concatenate([-pos[::-1], pos])


def heterodyne_model(params: SpectrumModelParams, grid) -> PsdTrace:
    w = np.asarray(grid, dtype=float)
    s = np.full_like(w, params.shot_floor)
    for mode in params.modes:
        a_s, a_as = params.amplitudes(mode)
        s += a_s * lorentzian(w + mode.omega, mode.gamma) + a_as * lorentzian(w - mode.omega, mode.gamma)
    if params.classical_level:
        s += params.classical_level * cavity_response(params.kappa, params.delta, w)
    if params.classical_floor is not None:
        s += params.classical_floor(w)
    bw = float(np.median(np.diff(w))) if w.size > 1 else 0.0
    return PsdTrace(w, s, n_avg=None, resolution_bw=bw)


def spectrum_params_from_config(
    config: "ExperimentConfig", n_x: float, *, include_y: bool = False, classical_level: float = 0.0
) -> SpectrumModelParams:
    """Lorentzian model at the configured frequencies, linewidths and weights for a chosen n_x."""
    het, trap = config.heterodyne, config.trap
    modes = [ModeParams(trap.omega_x, het.gamma_x, n_x, config.sideband_weight_x)]
    if include_y:
        modes.append(ModeParams(trap.omega_y, het.gamma_y, het.n_y, het.weight_y))
    return SpectrumModelParams(
        modes=tuple(modes),
        kappa=config.cavity.kappa,
        delta=config.drive.detuning,
        classical_level=classical_level,
    )


def config_grid(config: "ExperimentConfig") -> np.ndarray:
    het = config.heterodyne
    return sideband_grid(het.band_lo, het.band_hi, het.bin)


def gamma_noise(size: int, n_avg: int, rng: np.random.Generator) -> np.ndarray:
    # mean 1, variance 1/n_avg: average of n_avg exponential periodogram bins
    return rng.gamma(shape=n_avg, scale=1.0 / n_avg, size=size)


def synthesize_spectrum(model: PsdTrace, n_avg: int, seed=None, *, het_freq: Optional[float] = None) -> PsdTrace:
    if n_avg < 1:
        raise DomainError(f"n_avg must be >= 1, got {n_avg}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    noisy = model.psd * gamma_noise(model.psd.size, int(n_avg), rng)
    return PsdTrace(model.freq, noisy, n_avg=int(n_avg), resolution_bw=model.resolution_bw, het_freq=het_freq)


def lo_power_series(
    model: PsdTrace,
    lo_powers: Sequence[float],
    p_ref: float,
    *,
    n_avg: Optional[int] = None,
    seed=None,
    quadratic: float = 0.0,
) -> list[PsdTrace]:
    """
    One spectrum recorded at several LO powers, in units of the shot floor at p_ref.

    Shot noise and sidebands grow with P/p_ref; quadratic adds a flat classical term
    quadratic * (P/p_ref)^2. Without n_avg the traces are noiseless.
    """
    require_positive(p_ref=p_ref)
    powers = np.asarray(lo_powers, dtype=float)
    if np.any(powers < 0):
        raise DomainError("LO powers must be >= 0")
    if quadratic < 0:
        raise DomainError(f"quadratic must be >= 0, got {quadratic!r}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    out = []
    for p in powers:
        scale = p / p_ref
        base = model if n_avg is None else synthesize_spectrum(model, n_avg, rng, het_freq=model.het_freq)
        out.append(replace(base, psd=scale * base.psd + quadratic * scale**2))
    return out


# ---------------------------------------------------------------------------
# exact response of the linear model


def linear_response_psd(model: LinearModel, grid) -> PsdTrace:
    """
    Two-sided PSD of z = X_out - i Y_out, the demodulated complex record.

    z carries a_out^dagger, so with FFT sign conventions the anti-Stokes line lands at +Omega.
    """
    w = np.asarray(grid, dtype=float)
    A, B, Q = model.drift, model.noise_input, model.noise_cov
    C, E = model.output_state, model.output_feedthrough
    u = np.array([1.0, -1.0j])
    eye = np.eye(A.shape[0])
    out = np.empty(w.size)
    for i, wi in enumerate(w):
        G = C @ np.linalg.solve(1j * wi * eye - A, B) + E
        h = u @ G
        out[i] = float(np.real(h @ Q @ h.conj()))
    bw = float(np.median(np.diff(w))) if w.size > 1 else 0.0
    return PsdTrace(w, out, n_avg=None, resolution_bw=bw)


# ---------------------------------------------------------------------------
# time domain


@dataclass(frozen=True)
class TimeTrace:
    dt: float
    samples: np.ndarray
    seed: Optional[int] = None
    model_hash: str = ""
    states: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        require_positive(dt=self.dt)
        samples = np.asarray(self.samples)
        if not np.all(np.isfinite(samples)):
            raise DomainError("time trace contains non-finite samples")
        object.__setattr__(self, "samples", samples)

    @property
    def duration(self) -> float:
        return self.dt * self.samples.size


def _van_loan(model: LinearModel, dt: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    One-step transition of the augmented state (x, int x dt, int dw) and the exact covariance
    of its noise increment.
    """
    A, B, Q = model.drift, model.noise_input, model.noise_cov
    nx, nw = A.shape[0], B.shape[1]
    n = 2 * nx + nw
    F = np.zeros((n, n))
    F[:nx, :nx] = A
    F[nx : 2 * nx, :nx] = np.eye(nx)
    G = np.zeros((n, nw))
    G[:nx] = B
    G[2 * nx :] = np.eye(nw)

    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = -F
    M[:n, n:] = G @ Q @ G.T
    M[n:, n:] = F.T
    EM = expm(M * dt)
    Phi = EM[n:, n:].T
    Qd = Phi @ EM[:n, n:]
    Qd = 0.5 * (Qd + Qd.T)
    return Phi[:, :nx], Qd, Phi


def _sqrt_psd(S: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(S)
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def _ar1_run(Phi: np.ndarray, eta: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """x_{k+1} = Phi x_k + eta_k for all k, returned as x_0..x_{N-1} (states at interval starts)."""
    lam, V = np.linalg.eig(Phi)
    if np.linalg.cond(V) > 1e8:
        xs = np.empty((eta.shape[0], x0.size))
        x = x0.astype(float)
        for k in range(eta.shape[0]):
            xs[k] = x
            x = Phi @ x + eta[k]
        return xs
    Vinv = np.linalg.inv(V)
    y0 = Vinv @ x0
    u = eta @ Vinv.T
    ys = np.empty((eta.shape[0], x0.size), dtype=complex)
    for j in range(lam.size):
        # ys[k] = lam ys[k-1] + u[k-1], ys[0] = y0
        drive = np.concatenate([[0.0], u[:-1, j]])
        ys[:, j], _ = signal.lfilter([1.0], [1.0, -lam[j]], drive, zi=[y0[j]])
    return np.real(ys @ V.T)


def simulate_langevin(
    model: LinearModel,
    dt: float,
    duration: float,
    seed=None,
    *,
    x0: Optional[Sequence[float]] = None,
    keep_states: bool = False,
    chunk: int = 1 << 17,
) -> TimeTrace:
    """
    Exact discretisation of the linear SDE; the record is the interval average of the complex
    output z = X_out - i Y_out, so vacuum input noise and cavity field interfere as they should.

    Without x0 the start state is drawn from the stationary covariance.
    """
    require_positive(dt=dt, duration=duration)
    ev = model.eigenvalues
    if np.any(ev.real >= 0):
        raise InstabilityError("cannot simulate an unstable model", eigenvalues=ev)
    dt_max = 0.05 * min(TWO_PI / model.omega, TWO_PI / model.kappa)
    if dt > dt_max * (1 + 1e-9):
        raise PreconditionError(f"dt={dt:.3g} s exceeds 0.05 of the fastest period ({dt_max:.3g} s)")
    gamma_total = 2.0 * float(np.min(-ev.real))
    if duration * gamma_total < 100.0 * (1 - 1e-9):
        raise PreconditionError(
            f"duration {duration:.3g} s shorter than 100/gamma_total = {100.0 / gamma_total:.3g} s"
        )

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n_steps = int(round(duration / dt))
    nx = model.drift.shape[0]

    Phi_x, Qd, _ = _van_loan(model, dt)
    Phi_xx = Phi_x[:nx]
    Phi_ix = Phi_x[nx : 2 * nx]
    L = _sqrt_psd(Qd)
    C, E = model.output_state, model.output_feedthrough
    u = np.array([1.0, -1.0j])

    if x0 is None:
        V, _ = steady_state_covariance(model)
        x = _sqrt_psd(V) @ rng.standard_normal(nx)
    else:
        x = np.asarray(x0, dtype=float)

    samples = np.empty(n_steps, dtype=complex)
    states = np.empty((n_steps, nx)) if keep_states else None
    done = 0
    while done < n_steps:
        m = min(chunk, n_steps - done)
        eta = rng.standard_normal((m, L.shape[1])) @ L.T
        xs = _ar1_run(Phi_xx, eta[:, :nx], x)
        integ = xs @ Phi_ix.T + eta[:, nx : 2 * nx]
        w_int = eta[:, 2 * nx :]
        y = (integ @ C.T + w_int @ E.T) / dt
        samples[done : done + m] = y @ u
        if keep_states:
            states[done : done + m] = xs
        x = Phi_xx @ xs[-1] + eta[-1, :nx]
        done += m

    logger.debug("simulated %d steps, dt=%.3g s, gamma_total=%.3g 1/s", n_steps, dt, gamma_total)
    seed_tag = seed if isinstance(seed, (int, np.integer)) else None
    return TimeTrace(dt=dt, samples=samples, seed=seed_tag, model_hash=model.digest(), states=states)


def welch_psd(trace: TimeTrace, segment_len: int, window: str = "hann") -> PsdTrace:
    """Averaged modified periodogram, two-sided, shifted so frequency increases from negative."""
    n = trace.samples.size
    if segment_len > n:
        raise DomainError(f"segment_len {segment_len} longer than trace ({n} samples)")
    if window not in ("rectangular", "hann"):
        raise DomainError(f"window must be 'rectangular' or 'hann', got {window!r}")
    win = "boxcar" if window == "rectangular" else "hann"
    overlap = 0 if window == "rectangular" else segment_len // 2

    f, pxx = signal.welch(
        trace.samples,
        fs=1.0 / trace.dt,
        window=win,
        nperseg=segment_len,
        noverlap=overlap,
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    f = np.fft.fftshift(f)
    pxx = np.fft.fftshift(pxx)
    n_avg = (n - overlap) // (segment_len - overlap)
    return PsdTrace(TWO_PI * f, np.real(pxx), n_avg=int(n_avg), resolution_bw=TWO_PI / (segment_len * trace.dt))
