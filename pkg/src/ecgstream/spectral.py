"""Spectral quality checks: DFT, PSD, input-referred noise, and SNR.

The PSD is the plain single-transform estimate
``10*log10(|X[k]|^2 / (N*SR))`` over a rectangular window, reported
one-sided (k = 0..N/2) without the factor-2 energy fold — i.e. the
formula applied verbatim per bin.  Zero-power bins are floored at
-300 dB to keep results finite and plottable.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .signals import TimeSeries, Units

PSD_FLOOR_DB = -300.0
DEFAULT_FFT_N = 4096
DEFAULT_SNR_BAND = (1.0, 102.0)


@dataclass(frozen=True)
class PsdEstimate:
    freqs_hz: np.ndarray
    psd_db: np.ndarray
    n_fft: int
    rate_hz: float

    def __post_init__(self):
        if self.n_fft < 1 or self.n_fft & (self.n_fft - 1):
            raise ValueError("transform size must be a power of two")
        if len(self.psd_db) != self.n_fft // 2 + 1:
            raise ValueError("one-sided PSD must have N/2 + 1 bins")


def dft(x) -> np.ndarray:
    """X[k] = sum_n x[n] e^{-j 2 pi k n / N} (fast transform, same semantics)."""
    x = np.asarray(x)
    if x.size < 1:
        raise ValueError("dft needs at least one sample")
    return np.fft.fft(x)


def psd(x, n_fft: int = DEFAULT_FFT_N, rate_hz: float = 500.0) -> PsdEstimate:
    """One-sided PSD of the first n_fft samples (zero-padded when shorter)."""
    if rate_hz <= 0:
        raise ValueError("rate must be positive")
    if n_fft < 1 or n_fft & (n_fft - 1):
        raise ValueError("transform size must be a power of two")
    x = np.asarray(x, dtype=np.float64)
    spectrum = np.fft.fft(x[:n_fft], n=n_fft)
    power = np.abs(spectrum[: n_fft // 2 + 1]) ** 2 / (n_fft * rate_hz)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(power)
    db = np.maximum(db, PSD_FLOOR_DB)
    freqs = np.arange(n_fft // 2 + 1) * rate_hz / n_fft
    return PsdEstimate(freqs, db, n_fft, rate_hz)


def input_referred(output_ts: TimeSeries, total_gain: float) -> TimeSeries:
    """Refer an output voltage back to the amplifier input: (v - mean) / gain."""
    if total_gain <= 0:
        raise ValueError("gain must be positive")
    if output_ts.units is not Units.VOLT:
        raise ValueError("input_referred expects a volt series")
    centered = output_ts.values - np.mean(output_ts.values)
    return TimeSeries(centered / total_gain, output_ts.rate_hz, Units.VOLT)


def snr_db(
    signal_psd: PsdEstimate,
    noise_psd: PsdEstimate,
    band: tuple[float, float] = DEFAULT_SNR_BAND,
) -> float:
    """Band-limited linear-power ratio in dB; +inf when the band holds no noise."""
    if signal_psd.n_fft != noise_psd.n_fft or signal_psd.rate_hz != noise_psd.rate_hz:
        raise ValueError("signal and noise PSDs must share N and sample rate")
    lo, hi = band
    mask = (signal_psd.freqs_hz >= lo) & (signal_psd.freqs_hz <= hi)
    if not np.any(mask):
        raise ValueError(f"band [{lo}, {hi}] Hz covers no PSD bins")
    p_sig = np.sum(10.0 ** (signal_psd.psd_db[mask] / 10.0))
    p_noise = np.sum(10.0 ** (noise_psd.psd_db[mask] / 10.0))
    if p_noise == 0.0:
        return math.inf
    return float(10.0 * np.log10(p_sig / p_noise))


def save_psd_csv(path: str | os.PathLike, est: PsdEstimate) -> None:
    with open(path, "w") as fh:
        fh.write("freq_hz,psd_db\n")
        for f, db in zip(est.freqs_hz, est.psd_db):
            fh.write(f"{float(f)!r},{float(db)!r}\n")
