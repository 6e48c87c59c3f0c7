"""Dual-path beat detection and heart-rate extraction.

Path A thresholds the normalized absolute filtered signal; path B
thresholds the normalized squared slope.  Both paths share one scalar
threshold, made scale-free by a running-max normalizer.  A beat is
reported only when, after shifting path A by the slope path's 26 ms
accounting, both paths agree within a match window; BPM then follows
from consecutive fused R-R gaps, gated to the physiological range.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from ._backend import get_backend

SOURCE_PATH_A = "pathA"
SOURCE_PATH_B = "pathB"
SOURCE_FUSED = "fused"

BPM_MIN = 20.0
BPM_MAX = 300.0


@dataclass(frozen=True)
class DetectorConfig:
    threshold: float
    refractory_ms: float = 200.0
    norm_window_s: float = 3.0
    match_window_ms: float = 40.0
    derivative_shift_samples: int = 13

    def __post_init__(self):
        if not (0.0 < self.threshold < 1.0):
            raise ValueError("threshold must lie in (0, 1)")
        if self.refractory_ms <= 0:
            raise ValueError("refractory must be positive")
        if self.match_window_ms <= 0:
            raise ValueError("match window must be positive")
        if self.norm_window_s <= 0:
            raise ValueError("normalization window must be positive")

    def refractory_samples(self, rate_hz: float) -> int:
        return max(1, int(round(self.refractory_ms * rate_hz / 1000.0)))

    def match_window_samples(self, rate_hz: float) -> int:
        return max(1, int(round(self.match_window_ms * rate_hz / 1000.0)))


@dataclass(frozen=True)
class BeatEvent:
    sample_index: int
    source: str = SOURCE_FUSED


@dataclass(frozen=True)
class BpmReading:
    bpm: float
    at_index: int


class RunningMaxNormalizer:
    """Divides by a leaky running max: m[n] = max(|x[n]|, lam * m[n-1]).

    lam = exp(-1/(window_s * rate)).  The max seeds at the first nonzero
    sample; all-zero input stays zero.  Output lies in [-1, 1] (in [0, 1]
    for non-negative input) and is invariant to positive input scaling.
    """

    def __init__(self, rate_hz: float, window_s: float = 3.0, backend: str | None = None):
        if rate_hz <= 0 or window_s <= 0:
            raise ValueError("rate and window must be positive")
        self.lam = math.exp(-1.0 / (window_s * rate_hz))
        self._kern = get_backend(backend)
        self._state = self._kern.runmax_init()

    @property
    def current_max(self) -> float:
        return float(self._state[0])

    def push(self, chunk) -> np.ndarray:
        return self._kern.runmax_push(self._state, self.lam, chunk)


class PathDetector:
    """Streaming local-maximum detector with refractory suppression.

    An event marks each local maximum above the threshold; a later
    candidate inside the refractory window replaces the held event only
    if strictly larger (ties keep the earlier peak).  Events are emitted
    once no future sample can displace them; everything at or below
    :attr:`watermark` is final.
    """

    def __init__(self, cfg: DetectorConfig, rate_hz: float, source: str = SOURCE_PATH_A):
        self.cfg = cfg
        self.source = source
        self._refr = cfg.refractory_samples(rate_hz)
        self._prev2 = math.inf  # guards the stream head: index 0 is never a peak
        self._prev1 = math.inf
        self._next_index = 0
        self._pending: tuple[int, float] | None = None
        self._flushed = False

    @property
    def watermark(self) -> float:
        """Highest index whose event set can no longer change."""
        if self._flushed:
            return math.inf
        return self._next_index - 1 - self._refr

    def push(self, chunk) -> list[BeatEvent]:
        if self._flushed:
            raise RuntimeError("detector already flushed")
        x = np.asarray(chunk, dtype=np.float64)
        out: list[BeatEvent] = []
        if x.size:
            ext = np.concatenate(([self._prev2, self._prev1], x))
            mid = ext[1:-1]
            is_peak = (ext[:-2] < mid) & (mid >= ext[2:]) & (mid > self.cfg.threshold)
            base = self._next_index - 1  # absolute index of ext[1]
            for j in np.nonzero(is_peak)[0]:
                idx = base + int(j)
                height = float(mid[j])
                if self._pending is not None and idx - self._pending[0] < self._refr:
                    if height > self._pending[1]:
                        self._pending = (idx, height)
                else:
                    if self._pending is not None:
                        out.append(BeatEvent(self._pending[0], self.source))
                    self._pending = (idx, height)
            self._prev2, self._prev1 = float(ext[-2]), float(ext[-1])
            self._next_index += x.size
        # pending becomes final once the refractory window has fully passed
        if self._pending is not None and (self._next_index - 1) - self._pending[0] >= self._refr:
            out.append(BeatEvent(self._pending[0], self.source))
            self._pending = None
        return out

    def flush(self) -> list[BeatEvent]:
        """End of stream: release any held event."""
        self._flushed = True
        if self._pending is None:
            return []
        event = BeatEvent(self._pending[0], self.source)
        self._pending = None
        return [event]


def detect_path(norm_values, cfg: DetectorConfig, rate_hz: float,
                source: str = SOURCE_PATH_A) -> list[BeatEvent]:
    """One-shot detection over a whole normalized signal."""
    det = PathDetector(cfg, rate_hz, source)
    events = det.push(norm_values)
    events.extend(det.flush())
    return events


def _indices(events) -> np.ndarray:
    if len(events) and isinstance(events[0], BeatEvent):
        return np.array([e.sample_index for e in events], dtype=np.int64)
    return np.asarray(events, dtype=np.int64).reshape(-1)


def fuse(events_a, events_b, cfg: DetectorConfig, rate_hz: float) -> list[BeatEvent]:
    """Greedy in-order one-to-one agreement between the two paths.

    events_a must already carry the +derivative_shift_samples alignment.
    A fused beat is reported at the path-A index iff an unmatched path-B
    event lies within the match window; everything unmatched is dropped.
    """
    a_idx = _indices(events_a)
    b_idx = _indices(events_b)
    win = cfg.match_window_samples(rate_hz)
    fused: list[BeatEvent] = []
    j = 0
    for a in a_idx:
        while j < len(b_idx) and b_idx[j] < a - win:
            j += 1
        if j < len(b_idx) and abs(int(b_idx[j]) - int(a)) <= win:
            fused.append(BeatEvent(int(a), SOURCE_FUSED))
            j += 1
    return fused


class Fuser:
    """Streaming version of :func:`fuse` driven by detector watermarks.

    A path-A event resolves once path B's watermark has passed its match
    window, guaranteeing the streamed matching equals the batch matching.
    """

    def __init__(self, cfg: DetectorConfig, rate_hz: float):
        self._win = cfg.match_window_samples(rate_hz)
        self._a: deque[int] = deque()
        self._b: deque[int] = deque()
        self._b_watermark = -math.inf

    def push(self, a_indices, b_indices, b_watermark: float) -> list[BeatEvent]:
        self._a.extend(int(i) for i in a_indices)
        self._b.extend(int(i) for i in b_indices)
        self._b_watermark = max(self._b_watermark, b_watermark)
        fused: list[BeatEvent] = []
        while self._a:
            a = self._a[0]
            if a + self._win > self._b_watermark:
                break
            self._a.popleft()
            while self._b and self._b[0] < a - self._win:
                self._b.popleft()
            if self._b and abs(self._b[0] - a) <= self._win:
                fused.append(BeatEvent(a, SOURCE_FUSED))
                self._b.popleft()
        return fused

    def finish(self) -> list[BeatEvent]:
        return self.push((), (), math.inf)


class BpmTracker:
    """Consecutive-gap heart rate with the physiological acceptance gate."""

    def __init__(self, rate_hz: float):
        self._rate = rate_hz
        self._last: int | None = None
        self.rejected: list[BpmReading] = []

    def push(self, beat_indices) -> list[BpmReading]:
        readings: list[BpmReading] = []
        for idx in _indices(beat_indices):
            idx = int(idx)
            if self._last is not None:
                gap = idx - self._last
                if gap <= 0:
                    raise ValueError(f"beat indices must strictly increase (gap {gap})")
                reading = BpmReading(60.0 * self._rate / gap, idx)
                if BPM_MIN <= reading.bpm <= BPM_MAX:
                    readings.append(reading)
                else:
                    self.rejected.append(reading)
            self._last = idx
        return readings


def bpm_stream(beats, rate_hz: float) -> tuple[list[BpmReading], list[BpmReading]]:
    """BPM per consecutive beat pair: (accepted readings, gate-rejected readings)."""
    tracker = BpmTracker(rate_hz)
    accepted = tracker.push(beats)
    return accepted, tracker.rejected
