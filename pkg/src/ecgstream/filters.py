"""Digital filter design and frequency-response evaluation.

Two designs drive the host-side processing chain:

* a length-500 linear-phase least-squares FIR bandpass (1-102 Hz at a
  500 Hz rate) that removes baseline wander and high-frequency noise, and
* an order-6 Butterworth IIR band-stop centered on the 50 Hz mains line,
  realized as three biquads.

The FIR length is even, giving a type-II filter whose forced zero at
Nyquist lands inside the stopband.  The band-stop is built from an
analog order-3 Butterworth lowpass prototype via the standard band
transform and a prewarped bilinear map; its transform is centered on the
prewarped notch frequency itself (keeping the prewarped edge bandwidth),
which pins the transmission zeros to the requested center exactly
instead of a fraction of a hertz off at the edges' geometric mean.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

MAG_FLOOR_DB = -300.0


@dataclass(frozen=True)
class FirCoeffs:
    """Linear-phase FIR taps plus the rate they were designed for."""

    taps: np.ndarray
    rate_hz: float

    def __post_init__(self):
        object.__setattr__(self, "taps", np.asarray(self.taps, dtype=np.float64))
        if self.taps.ndim != 1 or self.taps.size < 1:
            raise ValueError("taps must be a non-empty 1-D sequence")
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")

    def __len__(self) -> int:
        return len(self.taps)

    @property
    def is_symmetric(self) -> bool:
        return bool(np.max(np.abs(self.taps - self.taps[::-1])) <= 1e-12)


@dataclass(frozen=True)
class IirCascade:
    """Biquad cascade; each row is (b0, b1, b2, a1, a2) with a0 normalized to 1."""

    sections: np.ndarray
    rate_hz: float

    def __post_init__(self):
        sec = np.atleast_2d(np.asarray(self.sections, dtype=np.float64))
        object.__setattr__(self, "sections", sec)
        if sec.shape[1] != 5:
            raise ValueError("each section must be (b0, b1, b2, a1, a2)")
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        for b0, b1, b2, a1, a2 in sec:
            poles = np.roots([1.0, a1, a2])
            if np.any(np.abs(poles) >= 1.0):
                raise ValueError("unstable section: pole on or outside the unit circle")

    def __len__(self) -> int:
        return len(self.sections)

    def sos(self) -> np.ndarray:
        """Sections as (n, 6) rows (b0, b1, b2, 1, a1, a2)."""
        n = len(self.sections)
        out = np.empty((n, 6))
        out[:, :3] = self.sections[:, :3]
        out[:, 3] = 1.0
        out[:, 4:] = self.sections[:, 3:]
        return out


@dataclass(frozen=True)
class FrequencyResponse:
    freqs_hz: np.ndarray
    magnitude_db: np.ndarray
    phase_rad: np.ndarray
    group_delay_samples: np.ndarray


def design_fir_ls(
    length: int = 500,
    pass_lo_hz: float = 1.0,
    pass_hi_hz: float = 102.0,
    rate_hz: float = 500.0,
    stop_lo_edge_hz: float = 0.2,
    stop_hi_edge_hz: float = 107.0,
    grid_mult: int = 8,
) -> FirCoeffs:
    """Least-squares linear-phase FIR bandpass.

    Minimizes the unweighted squared error to an ideal bandpass on a dense
    uniform grid (grid_mult * length points over [0, rate/2]), with
    don't-care transition bands (stop_lo_edge, pass_lo) and
    (pass_hi, stop_hi_edge) excluded from the fit.
    """
    if length < 3:
        raise ValueError("length must be at least 3")
    if not (0.0 < pass_lo_hz < pass_hi_hz < rate_hz / 2.0):
        raise ValueError("need 0 < pass_lo < pass_hi < rate/2")
    if not (0.0 <= stop_lo_edge_hz < pass_lo_hz and pass_hi_hz < stop_hi_edge_hz <= rate_hz / 2.0):
        raise ValueError("transition edges must bracket the passband inside [0, rate/2]")

    freqs = np.linspace(0.0, rate_hz / 2.0, grid_mult * length)
    desired = ((freqs >= pass_lo_hz) & (freqs <= pass_hi_hz)).astype(np.float64)
    dont_care = ((freqs > stop_lo_edge_hz) & (freqs < pass_lo_hz)) | (
        (freqs > pass_hi_hz) & (freqs < stop_hi_edge_hz)
    )
    w = 2.0 * np.pi * freqs[~dont_care] / rate_hz
    d = desired[~dont_care]

    if length % 2 == 0:
        # type II: A(w) = sum b_n cos(w (n - 1/2)), n = 1..length/2
        offsets = np.arange(1, length // 2 + 1) - 0.5
        basis = np.cos(np.outer(w, offsets))
        b, *_ = np.linalg.lstsq(basis, d, rcond=None)
        taps = np.concatenate([b[::-1], b]) / 2.0
    else:
        # type I: A(w) = b_0 + sum b_n cos(w n), n = 1..(length-1)/2
        half = (length - 1) // 2
        basis = np.cos(np.outer(w, np.arange(half + 1)))
        b, *_ = np.linalg.lstsq(basis, d, rcond=None)
        taps = np.concatenate([b[:0:-1] / 2.0, [b[0]], b[1:] / 2.0])

    return FirCoeffs(taps, rate_hz)


def design_butter_notch(
    order: int = 6,
    center_hz: float = 50.0,
    stop_band: tuple[float, float] = (48.0, 52.0),
    rate_hz: float = 500.0,
) -> IirCascade:
    """Butterworth band-stop as order/2 biquads with exact zeros at center_hz."""
    if order < 2 or order % 2:
        raise ValueError("order must be a positive even integer")
    lo, hi = stop_band
    if not (0.0 < lo < hi < rate_hz / 2.0):
        raise ValueError("need 0 < stop_lo < stop_hi < rate/2")
    if not (lo < center_hz < hi):
        raise ValueError("center frequency must lie inside the stop band")

    n = order // 2
    w0 = np.tan(np.pi * center_hz / rate_hz)
    bw = np.tan(np.pi * hi / rate_hz) - np.tan(np.pi * lo / rate_hz)

    # analog Butterworth lowpass prototype poles, left half plane
    k = np.arange(1, n + 1)
    proto = np.exp(1j * np.pi * (2 * k + n - 1) / (2 * n))

    # band-stop transform s -> bw*s/(s^2 + w0^2): each prototype pole p
    # yields the roots of s^2 - (bw/p) s + w0^2 = 0 and a zero pair at +/- j w0
    analog_poles = []
    for p in proto:
        c = bw / p
        disc = np.sqrt(c * c - 4.0 * w0 * w0 + 0j)
        analog_poles.extend([(c + disc) / 2.0, (c - disc) / 2.0])

    zpoles = [(1.0 + s) / (1.0 - s) for s in analog_poles]
    upper = sorted((z for z in zpoles if z.imag >= 0.0), key=lambda z: (z.real, z.imag))

    # digital zeros sit exactly on the unit circle at the notch frequency
    w0_dig = 2.0 * np.arctan(w0)
    num = np.array([1.0, -2.0 * np.cos(w0_dig), 1.0])

    sections = []
    for z in upper:
        a1 = -2.0 * z.real
        a2 = abs(z) ** 2
        scale = (1.0 + a1 + a2) / num.sum()  # unity gain at DC per section
        sections.append([num[0] * scale, num[1] * scale, num[2] * scale, a1, a2])
    return IirCascade(np.array(sections), rate_hz)


def _evaluate(filt: FirCoeffs | IirCascade, freqs_hz: np.ndarray) -> np.ndarray:
    """Complex response H(e^{j 2 pi f / rate}) on the given grid."""
    w = 2.0 * np.pi * np.asarray(freqs_hz, dtype=np.float64) / filt.rate_hz
    z1 = np.exp(-1j * w)
    if isinstance(filt, FirCoeffs):
        return np.exp(-1j * np.outer(w, np.arange(len(filt.taps)))) @ filt.taps
    h = np.ones_like(z1)
    for b0, b1, b2, a1, a2 in filt.sections:
        h *= (b0 + b1 * z1 + b2 * z1 * z1) / (1.0 + a1 * z1 + a2 * z1 * z1)
    return h


def _numeric_group_delay(filt, freqs: np.ndarray, rate: float, step_hz: float = 0.025):
    """-dphi/domega in samples via local central differences of unwrapped phase."""
    nyq = rate / 2.0
    lo = np.maximum(freqs - step_hz, 0.0)
    hi = np.minimum(freqs + step_hz, nyq)
    phases = np.unwrap(
        np.angle(np.stack([_evaluate(filt, lo), _evaluate(filt, hi)])), axis=0
    )
    dw = 2.0 * np.pi * (hi - lo) / rate
    with np.errstate(divide="ignore", invalid="ignore"):
        gd = -(phases[1] - phases[0]) / dw
    return np.where(np.isfinite(gd), gd, 0.0)


def freq_response(filt: FirCoeffs | IirCascade, freqs_hz) -> FrequencyResponse:
    """Magnitude (dB, floored at -300), unwrapped phase, and group delay.

    Symmetric FIR filters report their analytic constant (len-1)/2 sample
    delay; everything else uses a central difference of unwrapped phase
    with a grid step well under 0.05 Hz.
    """
    freqs = np.atleast_1d(np.asarray(freqs_hz, dtype=np.float64))
    if np.any(freqs < 0) or np.any(freqs > filt.rate_hz / 2.0):
        raise ValueError("frequencies must lie in [0, rate/2]")
    h = _evaluate(filt, freqs)
    mag = np.abs(h)
    with np.errstate(divide="ignore"):
        mag_db = 20.0 * np.log10(mag)
    mag_db = np.maximum(mag_db, MAG_FLOOR_DB)
    phase = np.unwrap(np.angle(h))
    if isinstance(filt, FirCoeffs) and filt.is_symmetric:
        gd = np.full_like(freqs, (len(filt.taps) - 1) / 2.0)
    else:
        gd = _numeric_group_delay(filt, freqs, filt.rate_hz)
    return FrequencyResponse(freqs, mag_db, phase, gd)


def fir_delay_seconds(fl: int, sr: float) -> float:
    """Group delay of a length-fl linear-phase FIR at sample rate sr."""
    if fl < 1:
        raise ValueError("filter length must be at least 1")
    if sr <= 0:
        raise ValueError("sample rate must be positive")
    return (fl - 1) / (2.0 * sr)


def save_coeffs(path: str | os.PathLike, filt: FirCoeffs | IirCascade) -> None:
    """Text export: one tap per line (FIR) or five numbers per line (IIR)."""
    with open(path, "w") as fh:
        if isinstance(filt, FirCoeffs):
            fh.write(f"# fir len={len(filt.taps)} rate={filt.rate_hz:g}\n")
            for t in filt.taps:
                fh.write(repr(float(t)) + "\n")
        else:
            fh.write(f"# iir sections={len(filt.sections)} rate={filt.rate_hz:g}\n")
            for row in filt.sections:
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_coeffs(path: str | os.PathLike) -> FirCoeffs | IirCascade:
    with open(path) as fh:
        header = fh.readline().strip()
        body = [line.strip() for line in fh if line.strip()]
    fields = dict(
        part.split("=", 1) for part in header.lstrip("# ").split() if "=" in part
    )
    rate = float(fields.get("rate", 0))
    if header.startswith("# fir"):
        return FirCoeffs(np.array([float(v) for v in body]), rate)
    if header.startswith("# iir"):
        rows = [[float(v) for v in line.split()] for line in body]
        return IirCascade(np.array(rows), rate)
    raise ValueError(f"{path}: unrecognized coefficient header {header!r}")


def save_response_csv(path: str | os.PathLike, resp: FrequencyResponse) -> None:
    with open(path, "w") as fh:
        fh.write("freq_hz,mag_db,phase_rad,group_delay_samples\n")
        for f, m, p, g in zip(
            resp.freqs_hz, resp.magnitude_db, resp.phase_rad, resp.group_delay_samples
        ):
            fh.write(f"{float(f)!r},{float(m)!r},{float(p)!r},{float(g)!r}\n")
