"""Stateful chunk-wise signal operators.

All operators guarantee chunking invariance: concatenating the outputs for
any split of the input equals the output of one whole-signal call,
bit-exactly, because each output sample is produced by the same kernel
recurrence either way.  States start zeroed; the first outputs of a cold
filter therefore carry the start-up transient, which downstream consumers
discard via their warm-up window.
"""

from __future__ import annotations

import numpy as np

from ._backend import get_backend
from .filters import FirCoeffs, IirCascade

DERIVATIVE_MEMORY = 13
DERIVATIVE_SHIFT_SAMPLES = 13  # event-time accounting: 26 ms at 500 Hz


class FirState:
    """Streaming FIR filter holding the last len(taps)-1 inputs."""

    def __init__(self, coeffs: FirCoeffs, backend: str | None = None):
        self.coeffs = coeffs
        self._kern = get_backend(backend)
        self._taps = np.ascontiguousarray(coeffs.taps, dtype=np.float64)
        self._state = self._kern.fir_init(self._taps)

    def process(self, chunk) -> np.ndarray:
        return self._kern.fir_push(self._taps, self._state, chunk)


class IirState:
    """Streaming biquad cascade with per-section transposed DF-II state."""

    def __init__(self, cascade: IirCascade, backend: str | None = None):
        self.cascade = cascade
        self._kern = get_backend(backend)
        self._sos = np.ascontiguousarray(cascade.sos(), dtype=np.float64)
        self._state = self._kern.sos_init(self._sos)

    def process(self, chunk) -> np.ndarray:
        return self._kern.sos_push(self._sos, self._state, chunk)


def apply_streaming(state: FirState | IirState, chunk) -> np.ndarray:
    """Filter one chunk, advancing the state in place."""
    return state.process(chunk)


def derivative_kernel(rate_hz: float) -> np.ndarray:
    """Causal taps of the 13-sample least-squares slope estimator (units/s).

    y[m] = rate * sum_{k=-6..6} k * x[m-6+k] / 182 — the LS straight-line
    slope over the window ending at m, exact on ramps.
    """
    return rate_hz * (6.0 - np.arange(DERIVATIVE_MEMORY)) / 182.0


class DerivState:
    """Streaming 13-sample slope estimator; emits only after its warm-up.

    Output j (counting from the first emission) is the slope of the input
    window [j, j+12]; a stream of n inputs yields max(0, n-12) outputs.
    """

    def __init__(self, rate_hz: float, backend: str | None = None):
        if rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        self.rate_hz = rate_hz
        self._kern = get_backend(backend)
        self._taps = np.ascontiguousarray(derivative_kernel(rate_hz))
        self._state = self._kern.fir_init(self._taps)
        self._seen = 0

    def process(self, chunk) -> np.ndarray:
        y = self._kern.fir_push(self._taps, self._state, chunk)
        skip = max(0, DERIVATIVE_MEMORY - 1 - self._seen)
        self._seen += len(y)
        return y[skip:]


def derivative13(state: DerivState, chunk) -> np.ndarray:
    """Slope of the signal in units/s, advancing the state in place."""
    return state.process(chunk)


def square(chunk) -> np.ndarray:
    """Elementwise square; adds no latency."""
    x = np.asarray(chunk, dtype=np.float64)
    return x * x


def align_events(indices, shift_samples: int) -> np.ndarray:
    """Shift event sample indices by a constant (e.g. +13 for the 26 ms path skew)."""
    return np.asarray(indices, dtype=np.int64) + int(shift_samples)
