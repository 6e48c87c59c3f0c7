"""Acquisition front-end emulator.

Models the analog conditioning chain (0.1 Hz high-pass, 50 Hz notch,
105 Hz low-pass, total gain 500, 0.3 V bias from a resistor divider,
3 V output swing) followed by the 12-bit ADC clocked at 500 Hz by a 2 ms
timer, and renders each retained sample as a 7-byte wire frame.

The analog stages are behavioral: first-order HP and second-order
Butterworth LP plus a unity-gain notch biquad, discretized at a 5 kHz
internal rate and decimated by the frame sampler down to the ADC clock.
Stage gains are folded into the single total gain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filters import IirCascade
from .signals import TimeSeries, Units
from .streaming import IirState
from .wire import encode_frame

ADC_RATE_HZ = 500.0


@dataclass(frozen=True)
class AdcModel:
    bits: int = 12
    vref_v: float = 3.3

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("ADC needs at least one bit")
        if self.vref_v <= 0:
            raise ValueError("reference voltage must be positive")

    @property
    def max_code(self) -> int:
        return 2**self.bits - 1

    @property
    def lsb_v(self) -> float:
        """Minimum detectable voltage step: vref / (2^bits - 1)."""
        return self.vref_v / self.max_code


def bias_voltage(r21_ohm: float, r22_ohm: float, supply_v: float) -> float:
    """Divider output supply * r22 / (r21 + r22)."""
    if r21_ohm < 0 or r22_ohm <= 0:
        raise ValueError("need r21 >= 0 and r22 > 0")
    if supply_v <= 0:
        raise ValueError("supply must be positive")
    total = r21_ohm + r22_ohm
    if total == 0:
        raise ValueError("divider resistance must be non-zero")
    return supply_v * r22_ohm / total


@dataclass(frozen=True)
class AnalogChainConfig:
    total_gain: float = 500.0
    bias_v: float = 0.3
    supply_v: float = 3.3
    swing_v: float = 3.0
    r21_ohm: float | None = None
    r22_ohm: float | None = None
    enable_analog_filters: bool = False
    internal_rate_hz: float = 5000.0

    def __post_init__(self):
        if self.supply_v <= 0:
            raise ValueError("supply must be positive")
        if not (0.0 <= self.bias_v < self.supply_v):
            raise ValueError("bias must lie in [0, supply)")
        if self.swing_v > self.supply_v:
            raise ValueError("swing cannot exceed the supply")
        if self.total_gain <= 0:
            raise ValueError("gain must be positive")
        if self.internal_rate_hz <= 0:
            raise ValueError("internal rate must be positive")
        if (self.r21_ohm is None) != (self.r22_ohm is None):
            raise ValueError("provide both divider resistors or neither")
        if self.r21_ohm is not None:
            implied = bias_voltage(self.r21_ohm, self.r22_ohm, self.supply_v)
            if abs(implied - self.bias_v) > 1e-9:
                raise ValueError(
                    f"divider gives {implied:.9f} V but bias_v is {self.bias_v:.9f} V"
                )


def _first_order_highpass(cutoff_hz: float, rate_hz: float) -> np.ndarray:
    # bilinear transform of s/(s + wc) with prewarped cutoff
    w = np.tan(np.pi * cutoff_hz / rate_hz)
    a0 = 1.0 + w
    return np.array([1.0 / a0, -1.0 / a0, 0.0, (w - 1.0) / a0, 0.0])


def _butter2_lowpass(cutoff_hz: float, rate_hz: float) -> np.ndarray:
    w0 = 2.0 * np.pi * cutoff_hz / rate_hz
    alpha = np.sin(w0) / np.sqrt(2.0)  # Q = 1/sqrt(2)
    c = np.cos(w0)
    a0 = 1.0 + alpha
    b = (1.0 - c) / 2.0
    return np.array([b / a0, 2.0 * b / a0, b / a0, -2.0 * c / a0, (1.0 - alpha) / a0])


def _unity_notch(center_hz: float, rate_hz: float, q: float = 30.0) -> np.ndarray:
    w0 = 2.0 * np.pi * center_hz / rate_hz
    alpha = np.sin(w0) / (2.0 * q)
    c = np.cos(w0)
    a0 = 1.0 + alpha
    return np.array([1.0 / a0, -2.0 * c / a0, 1.0 / a0, -2.0 * c / a0, (1.0 - alpha) / a0])


def analog_filter_cascade(cfg: AnalogChainConfig) -> IirCascade:
    """Behavioral HP(0.1 Hz) -> notch(50 Hz) -> LP(105 Hz), all unity passband gain."""
    rate = cfg.internal_rate_hz
    return IirCascade(
        np.stack(
            [
                _first_order_highpass(0.1, rate),
                _unity_notch(50.0, rate),
                _butter2_lowpass(105.0, rate),
            ]
        ),
        rate,
    )


def analog_chain(ts: TimeSeries, cfg: AnalogChainConfig) -> TimeSeries:
    """Millivolt input -> conditioned output voltage in [0, supply].

    Applies the analog filter stages (when enabled), then gain and bias,
    clamps to bias +/- swing/2, and finally to the supply rails.
    """
    if ts.units is not Units.MILLIVOLT:
        raise ValueError("analog_chain expects a millivolt series")
    x = ts.values / 1000.0
    if cfg.enable_analog_filters:
        if abs(ts.rate_hz - cfg.internal_rate_hz) > 1e-9:
            raise ValueError(
                f"analog filters are modeled at {cfg.internal_rate_hz:g} Hz; "
                f"input is sampled at {ts.rate_hz:g} Hz"
            )
        x = IirState(analog_filter_cascade(cfg)).process(x)
    y = cfg.bias_v + cfg.total_gain * x
    half_swing = cfg.swing_v / 2.0
    y = np.clip(y, cfg.bias_v - half_swing, cfg.bias_v + half_swing)
    y = np.clip(y, 0.0, cfg.supply_v)
    return TimeSeries(y, ts.rate_hz, Units.VOLT)


def quantize(v, adc: AdcModel = AdcModel()):
    """Voltage -> ADC code, clamping out-of-range inputs to the rails.

    Round-to-nearest with ties to even; works on scalars and arrays.
    """
    v = np.asarray(v, dtype=np.float64)
    codes = np.rint(np.clip(v, 0.0, adc.vref_v) * adc.max_code / adc.vref_v).astype(np.int64)
    return int(codes) if codes.ndim == 0 else codes


def code_to_voltage(code, adc: AdcModel = AdcModel()):
    """ADC code -> voltage rounded to 4 decimal places (the wire precision)."""
    code = np.asarray(code)
    if np.any(code < 0) or np.any(code > adc.max_code):
        raise ValueError(f"code outside [0, {adc.max_code}]")
    v = np.round(code * adc.vref_v / adc.max_code, 4)
    return float(v) if v.ndim == 0 else v


def sample_and_frame(
    ts: TimeSeries,
    cfg: AnalogChainConfig = AnalogChainConfig(),
    adc: AdcModel = AdcModel(),
    target_rate_hz: float = ADC_RATE_HZ,
) -> bytes:
    """Timer-driven sampling: decimate to the ADC clock, quantize, frame.

    The input must be sampled at the target rate or an integer multiple of
    it (every k-th sample is kept).  Each retained sample becomes 7 bytes.
    """
    if ts.units is not Units.VOLT:
        raise ValueError("sample_and_frame expects a volt series")
    ratio = ts.rate_hz / target_rate_hz
    k = round(ratio)
    if k < 1 or abs(ratio - k) > 1e-9:
        raise ValueError(
            f"input rate {ts.rate_hz:g} Hz is not an integer multiple of "
            f"{target_rate_hz:g} Hz"
        )
    kept = ts.values[::k]
    volts = code_to_voltage(quantize(kept, adc), adc)
    volts = np.atleast_1d(volts)
    return b"".join(encode_frame(v) for v in volts)
