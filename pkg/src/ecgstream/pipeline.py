"""Host-side processing pipeline: filters -> dual-path detection -> BPM.

Wires the streaming operators into the live chain fed by decoded frames:

    notch -> FIR bandpass -> path A: |.| -> normalize -> peaks
                          -> path B: slope13 -> square -> normalize -> peaks
    path A shifted +13 samples, fused with path B, gaps -> BPM

Reported beat indices are translated back to the input clock by the fixed
pipeline delay (rounded FIR group delay plus the 26 ms path accounting),
and everything inside the configurable warm-up window is discarded so the
cold-start filter transient never produces beats.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .detect import (
    BeatEvent,
    BpmReading,
    BpmTracker,
    DetectorConfig,
    Fuser,
    PathDetector,
    RunningMaxNormalizer,
    SOURCE_PATH_A,
    SOURCE_PATH_B,
)
from .filters import FirCoeffs, IirCascade, design_butter_notch, design_fir_ls
from .roc import Candidate, candidates as roc_candidates
from .streaming import DERIVATIVE_MEMORY, DerivState, FirState, IirState, square

DEFAULT_WARMUP_S = 1.5


def default_filters(rate_hz: float = 500.0) -> tuple[FirCoeffs, IirCascade]:
    """The stock bandpass + mains notch pair used by the live chain."""
    return design_fir_ls(rate_hz=rate_hz), design_butter_notch(rate_hz=rate_hz)


def evaluation_start(
    rate_hz: float, warmup_s: float = DEFAULT_WARMUP_S, guard_ms: float = 50.0
) -> int:
    """First sample index scored against ground truth.

    One match window past the warm-up cut: a beat straddling the cut can
    surface on either side of it (detected indices jitter by a few
    samples), so the guard band keeps it out of both the truth set and
    the detection set instead of letting it count as a miss or a false
    positive.
    """
    return int(round(warmup_s * rate_hz)) + int(round(guard_ms * rate_hz / 1000.0))


@dataclass
class PipelineResult:
    filtered: np.ndarray
    beats: list[BeatEvent] = field(default_factory=list)
    readings: list[BpmReading] = field(default_factory=list)


class BeatPipeline:
    """Streaming beat detector over decoded sample values.

    Feed chunks with :meth:`feed`; call :meth:`finish` once at end of
    stream to drain the filter delay (the input is extended with its last
    value, avoiding a step transient) and flush held detector state.
    Beat indices and BPM reading positions are in the input clock.
    """

    def __init__(
        self,
        cfg: DetectorConfig,
        rate_hz: float = 500.0,
        fir: FirCoeffs | None = None,
        notch: IirCascade | None = None,
        warmup_s: float = DEFAULT_WARMUP_S,
        backend: str | None = None,
    ):
        if fir is None or notch is None:
            stock_fir, stock_notch = default_filters(rate_hz)
            fir = fir or stock_fir
            notch = notch or stock_notch
        self.cfg = cfg
        self.rate_hz = rate_hz
        self.delay_comp = int(round((len(fir.taps) - 1) / 2.0)) + cfg.derivative_shift_samples
        self._warmup = int(round(warmup_s * rate_hz))
        self._notch = IirState(notch, backend)
        self._fir = FirState(fir, backend)
        self._deriv = DerivState(rate_hz, backend)
        self._norm_a = RunningMaxNormalizer(rate_hz, cfg.norm_window_s, backend)
        self._norm_b = RunningMaxNormalizer(rate_hz, cfg.norm_window_s, backend)
        self._det_a = PathDetector(cfg, rate_hz, SOURCE_PATH_A)
        self._det_b = PathDetector(cfg, rate_hz, SOURCE_PATH_B)
        self._fuser = Fuser(cfg, rate_hz)
        self._tracker = BpmTracker(rate_hz)
        self._deriv_padded = False
        self._last_value = 0.0
        self._finished = False

    def feed(self, values) -> PipelineResult:
        if self._finished:
            raise RuntimeError("pipeline already finished")
        return self._advance(np.asarray(values, dtype=np.float64), flushing=False)

    def finish(self) -> PipelineResult:
        """Drain the pipeline delay and flush all held events."""
        if self._finished:
            raise RuntimeError("pipeline already finished")
        self._finished = True
        pad = self.delay_comp + self.cfg.match_window_samples(self.rate_hz)
        pad += self.cfg.refractory_samples(self.rate_hz) + DERIVATIVE_MEMORY + 8
        result = self._advance(np.full(pad, self._last_value), flushing=True)
        a_events = self._det_a.flush()
        b_events = self._det_b.flush()
        fused = self._fuser.push(
            self._shift_a(a_events), [e.sample_index for e in b_events], b_watermark=np.inf
        )
        fused.extend(self._fuser.finish())
        self._emit(fused, result)
        return result

    def _shift_a(self, events) -> list[int]:
        shift = self.cfg.derivative_shift_samples
        return [e.sample_index + shift for e in events]

    def _advance(self, x: np.ndarray, flushing: bool) -> PipelineResult:
        if x.size and not flushing:
            self._last_value = float(x[-1])
        filtered = self._fir.process(self._notch.process(x))

        a_norm = self._norm_a.push(np.abs(filtered))
        a_events = self._det_a.push(a_norm)

        slope = self._deriv.process(filtered)
        if not self._deriv_padded and slope.size:
            # align slope output indices with the filtered clock: the first
            # emission corresponds to the window ending at sample 12
            slope = np.concatenate([np.zeros(DERIVATIVE_MEMORY - 1), slope])
            self._deriv_padded = True
        b_norm = self._norm_b.push(square(slope))
        b_events = self._det_b.push(b_norm)

        fused = self._fuser.push(
            self._shift_a(a_events),
            [e.sample_index for e in b_events],
            b_watermark=self._det_b.watermark,
        )
        result = PipelineResult(filtered=filtered if not flushing else np.empty(0))
        self._emit(fused, result)
        return result

    def _emit(self, fused: list[BeatEvent], result: PipelineResult) -> None:
        kept = []
        for event in fused:
            idx = event.sample_index - self.delay_comp
            if idx >= self._warmup:
                kept.append(BeatEvent(idx, event.source))
        result.beats.extend(kept)
        result.readings.extend(self._tracker.push([e.sample_index for e in kept]))


def run_pipeline(
    values, cfg: DetectorConfig, rate_hz: float = 500.0, **kwargs
) -> PipelineResult:
    """Batch convenience: feed everything, finish, and merge the results."""
    pipe = BeatPipeline(cfg, rate_hz, **kwargs)
    first = pipe.feed(values)
    rest = pipe.finish()
    return PipelineResult(
        filtered=first.filtered,
        beats=first.beats + rest.beats,
        readings=first.readings + rest.readings,
    )


def path_a_candidates(
    values,
    rate_hz: float = 500.0,
    fir: FirCoeffs | None = None,
    notch: IirCascade | None = None,
    warmup_s: float = DEFAULT_WARMUP_S,
    floor: float = 0.01,
    norm_window_s: float = 3.0,
    backend: str | None = None,
) -> list[Candidate]:
    """Threshold-sweep candidates from the path-A detection function.

    Runs the filter and normalizer chain over a whole recording, extracts
    every local maximum above the candidate floor, and translates indices
    back to the input clock (rounded FIR group delay); candidates before
    :func:`evaluation_start` are dropped so calibration scores the same
    region the live detector is evaluated on.
    """
    if fir is None or notch is None:
        stock_fir, stock_notch = default_filters(rate_hz)
        fir = fir or stock_fir
        notch = notch or stock_notch
    x = np.asarray(values, dtype=np.float64)
    delay = int(round((len(fir.taps) - 1) / 2.0))
    pad = np.full(delay, x[-1] if x.size else 0.0)
    filtered = FirState(fir, backend).process(
        IirState(notch, backend).process(np.concatenate([x, pad]))
    )
    norm = RunningMaxNormalizer(rate_hz, norm_window_s, backend).push(np.abs(filtered))
    start = evaluation_start(rate_hz, warmup_s)
    out = []
    for cand in roc_candidates(norm, floor):
        idx = cand.sample_index - delay
        if start <= idx < len(x):
            out.append(Candidate(idx, cand.height))
    return out
