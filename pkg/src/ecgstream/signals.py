"""Domain signal types, the synthetic single-lead ECG generator, and noise models.

The generator stands in for recorded subjects: each beat is a sum of five
Gaussian bumps (P, Q, R, S, T) placed on a uniform R-R grid, so the true
R-peak sample indices are known exactly and can be used as ground truth
when scoring a detector.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class Units(enum.Enum):
    MILLIVOLT = "mV"
    VOLT = "V"
    DIMENSIONLESS = "dimensionless"

    @classmethod
    def from_tag(cls, tag: str) -> "Units":
        for u in cls:
            if u.value == tag:
                return u
        raise ValueError(f"unknown units tag {tag!r}")


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled signal: values, sample rate in Hz, units tag."""

    values: np.ndarray
    rate_hz: float
    units: Units = Units.MILLIVOLT

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if not self.rate_hz > 0:
            raise ValueError(f"rate_hz must be positive, got {self.rate_hz}")
        if self.values.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite (no NaN/Inf)")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def duration_s(self) -> float:
        return len(self.values) / self.rate_hz

    def times(self) -> np.ndarray:
        return np.arange(len(self.values)) / self.rate_hz


@dataclass(frozen=True)
class Wave:
    """One Gaussian bump: amplitude in mV, center offset from R in s, std dev in s."""

    amp_mv: float
    center_s: float
    width_s: float

    def __post_init__(self):
        if not self.width_s > 0:
            raise ValueError("wave width must be positive")


@dataclass(frozen=True)
class EcgTemplate:
    """Per-beat morphology as five Gaussian waves keyed P, Q, R, S, T."""

    waves: dict[str, Wave]

    def __post_init__(self):
        missing = {"P", "Q", "R", "S", "T"} - set(self.waves)
        if missing:
            raise ValueError(f"template missing waves: {sorted(missing)}")
        if not self.waves["R"].amp_mv > 0:
            raise ValueError("R amplitude must be positive")

    @classmethod
    def lead_i(cls) -> "EcgTemplate":
        """Default Lead I morphology, R peak of 1.0 mV."""
        return cls(
            waves={
                "P": Wave(0.15, -0.20, 0.025),
                "Q": Wave(-0.1, -0.03, 0.010),
                "R": Wave(1.0, 0.0, 0.012),
                "S": Wave(-0.2, 0.03, 0.012),
                "T": Wave(0.3, 0.25, 0.05),
            }
        )

    @classmethod
    def lead_ii(cls) -> "EcgTemplate":
        """Lead II: same shape as Lead I scaled to a 5.0 mV R peak."""
        return cls.lead_i().scaled(5.0)

    def scaled(self, factor: float) -> "EcgTemplate":
        return EcgTemplate(
            waves={k: Wave(w.amp_mv * factor, w.center_s, w.width_s) for k, w in self.waves.items()}
        )

    def extent_s(self, n_sigmas: float = 4.0) -> tuple[float, float]:
        """(lead, trail) support around the R center, in seconds."""
        lead = max(0.0, max(-(w.center_s - n_sigmas * w.width_s) for w in self.waves.values()))
        trail = max(w.center_s + n_sigmas * w.width_s for w in self.waves.values())
        return lead, trail

    def sample(self, t_rel_s: np.ndarray) -> np.ndarray:
        """Evaluate the beat waveform at offsets from the R center (mV)."""
        t = np.asarray(t_rel_s, dtype=np.float64)
        out = np.zeros_like(t)
        for w in self.waves.values():
            out += w.amp_mv * np.exp(-((t - w.center_s) ** 2) / (2.0 * w.width_s**2))
        return out


@dataclass(frozen=True)
class NoiseSpec:
    """Additive noise: white Gaussian, 50 Hz mains, and slow baseline wander."""

    white_sigma_mv: float = 0.0
    mains_amp_mv: float = 0.0
    mains_phase_rad: float = 0.0
    wander_amp_mv: float = 0.0
    wander_freq_hz: float = 0.3

    MAINS_HZ = 50.0

    def __post_init__(self):
        if self.white_sigma_mv < 0 or self.mains_amp_mv < 0 or self.wander_amp_mv < 0:
            raise ValueError("noise amplitudes must be non-negative")
        if self.wander_amp_mv > 0 and not (0.05 <= self.wander_freq_hz <= 2.0):
            raise ValueError(
                f"wander frequency must lie in [0.05, 2] Hz, got {self.wander_freq_hz}"
            )


@dataclass(frozen=True)
class BeatTruth:
    """Ground-truth R-peak sample indices, strictly increasing."""

    r_indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        object.__setattr__(self, "r_indices", np.asarray(self.r_indices, dtype=np.int64))
        if self.r_indices.size and np.any(np.diff(self.r_indices) <= 0):
            raise ValueError("R indices must be strictly increasing")
        if self.r_indices.size and self.r_indices[0] < 0:
            raise ValueError("R indices must be non-negative")

    def __len__(self) -> int:
        return len(self.r_indices)


def generate_ecg(
    template: EcgTemplate,
    hr_bpm: float,
    duration_s: float,
    rate_hz: float,
) -> tuple[TimeSeries, BeatTruth]:
    """Synthesize a periodic ECG with exact R-peak ground truth.

    R peaks land on integer sample indices spaced round(60*rate/hr) samples
    apart; a beat is placed only when its whole template support fits inside
    the record, so no partial beats appear at the edges.
    """
    if not (20.0 <= hr_bpm <= 300.0):
        raise ValueError(f"heart rate {hr_bpm} outside [20, 300] BPM")
    if not duration_s > 0:
        raise ValueError("duration must be positive")
    if not rate_hz > 0:
        raise ValueError("sample rate must be positive")

    n = int(round(duration_s * rate_hz))
    lead_s, trail_s = template.extent_s()
    # epsilon guards the ceil against float dust (0.30*500 = 150.0000000003)
    lead = int(math.ceil(lead_s * rate_hz - 1e-9))
    trail = int(math.ceil(trail_s * rate_hz - 1e-9))
    rr = int(round(60.0 * rate_hz / hr_bpm))

    # one sampled beat, reused at every R position (R is on-grid by construction)
    beat = template.sample(np.arange(-lead, trail + 1) / rate_hz)

    values = np.zeros(n)
    r_indices = []
    r = lead
    while r + trail <= n - 1:
        values[r - lead : r + trail + 1] += beat
        r_indices.append(r)
        r += rr

    ts = TimeSeries(values, rate_hz, Units.MILLIVOLT)
    return ts, BeatTruth(np.array(r_indices, dtype=np.int64))


def add_noise(ts: TimeSeries, spec: NoiseSpec, seed: int) -> TimeSeries:
    """Add white + mains + wander noise; bit-reproducible for a fixed seed.

    Uses the counter-based Philox generator so identical seeds give
    identical streams across platforms.
    """
    if ts.units is not Units.MILLIVOLT:
        raise ValueError("add_noise expects a millivolt series")
    t = ts.times()
    out = ts.values.copy()
    if spec.white_sigma_mv > 0:
        rng = np.random.Generator(np.random.Philox(seed))
        out += spec.white_sigma_mv * rng.standard_normal(len(t))
    if spec.mains_amp_mv > 0:
        out += spec.mains_amp_mv * np.sin(
            2.0 * np.pi * NoiseSpec.MAINS_HZ * t + spec.mains_phase_rad
        )
    if spec.wander_amp_mv > 0:
        out += spec.wander_amp_mv * np.sin(2.0 * np.pi * spec.wander_freq_hz * t)
    return TimeSeries(out, ts.rate_hz, ts.units)


def rms(ts: TimeSeries | np.ndarray) -> float:
    """Root mean square of the sample values."""
    values = ts.values if isinstance(ts, TimeSeries) else np.asarray(ts, dtype=np.float64)
    if values.size == 0:
        raise ValueError("rms of an empty series is undefined")
    return float(np.sqrt(np.mean(values**2)))
