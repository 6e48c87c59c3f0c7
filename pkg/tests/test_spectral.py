"""DFT/PSD/SNR tests against brute-force and analytic oracles."""

import math

import numpy as np
import pytest

from ecgstream.signals import TimeSeries, Units
from ecgstream.spectral import PsdEstimate, dft, input_referred, psd, snr_db


def naive_dft(x):
    """Oracle: the double-loop transform, evaluated term by term."""
    x = np.asarray(x, dtype=complex)
    n = len(x)
    out = np.zeros(n, dtype=complex)
    for k in range(n):
        for i in range(n):
            out[k] += x[i] * np.exp(-1j * k * 2.0 * np.pi / n * i)
    return out


class TestDft:
    def test_impulse(self):
        assert np.allclose(dft([1, 0, 0, 0]), [1, 1, 1, 1])

    def test_constant(self):
        assert np.allclose(dft([1, 1, 1, 1]), [4, 0, 0, 0])

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(31)
        for n in (3, 16, 64):
            x = rng.standard_normal(n)
            assert np.allclose(dft(x), naive_dft(x), atol=1e-9)

    def test_linearity(self):
        rng = np.random.default_rng(37)
        x, y = rng.standard_normal((2, 128))
        assert np.allclose(dft(2.0 * x - 3.0 * y), 2.0 * dft(x) - 3.0 * dft(y), atol=1e-9)

    def test_conjugate_symmetry_for_real_input(self):
        rng = np.random.default_rng(41)
        x = rng.standard_normal(256)
        spectrum = dft(x)
        assert np.allclose(spectrum[1:][::-1], np.conj(spectrum[1:]), atol=1e-9)

    def test_parseval(self):
        rng = np.random.default_rng(43)
        for n in (64, 1024, 4096):
            x = rng.standard_normal(n)
            lhs = np.sum(np.abs(dft(x)) ** 2) / n
            rhs = np.sum(x**2)
            assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            dft([])


class TestPsd:
    def test_constant_signal_bin0(self):
        est = psd(np.ones(4096), 4096, 500.0)
        assert est.psd_db[0] == pytest.approx(10.0 * np.log10(4096.0 / 500.0), abs=1e-9)
        assert np.all(est.psd_db[1:] == -300.0)

    def test_all_zero_floored(self):
        est = psd(np.zeros(1024), 1024, 500.0)
        assert np.all(est.psd_db == -300.0)

    def test_on_bin_sinusoid_peak(self):
        n, sr, k = 4096, 500.0, 80
        t = np.arange(n)
        x = np.sin(2.0 * np.pi * k * t / n)
        est = psd(x, n, sr)
        expect = 10.0 * np.log10((n / 2.0) ** 2 / (n * sr))
        assert est.psd_db[k] == pytest.approx(expect, abs=1e-6)
        assert expect == pytest.approx(3.113, abs=1e-3)

    def test_bin_grid(self):
        est = psd(np.ones(100), 4096, 500.0)
        assert len(est.freqs_hz) == 2049
        assert est.freqs_hz[1] == pytest.approx(500.0 / 4096.0)
        assert est.freqs_hz[-1] == pytest.approx(250.0)

    def test_zero_pad_and_truncate(self):
        rng = np.random.default_rng(47)
        x = rng.standard_normal(5000)
        truncated = psd(x, 4096, 500.0)
        explicit = psd(x[:4096], 4096, 500.0)
        assert np.array_equal(truncated.psd_db, explicit.psd_db)
        short = psd(x[:100], 256, 500.0)
        padded = psd(np.concatenate([x[:100], np.zeros(156)]), 256, 500.0)
        assert np.array_equal(short.psd_db, padded.psd_db)

    def test_level_shift_under_scaling(self):
        rng = np.random.default_rng(53)
        x = rng.standard_normal(4096)
        base = psd(x, 4096, 500.0)
        scaled = psd(10.0 * x, 4096, 500.0)
        live = base.psd_db > -290
        assert np.allclose(scaled.psd_db[live] - base.psd_db[live], 20.0, atol=1e-9)

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ValueError, match="power of two"):
            psd(np.ones(10), 1000, 500.0)


class TestInputReferred:
    def test_constant_bias_removed(self):
        ts = TimeSeries(np.full(100, 0.3), 500.0, Units.VOLT)
        out = input_referred(ts, 500.0)
        assert np.allclose(out.values, 0.0)

    def test_linear_scaling(self):
        # 1 mV sinusoid on a 0.3 V bias through gain 500 refers back to 2 uV;
        # the sampled sine peaks at cos(pi/50), slightly under 1
        t = np.arange(1000) / 500.0
        sine = 1e-3 * np.sin(2 * np.pi * 10 * t)
        out = input_referred(TimeSeries(0.3 + sine, 500.0, Units.VOLT), 500.0)
        assert np.allclose(out.values, (sine - sine.mean()) / 500.0, atol=1e-18)
        assert np.abs(out.values).max() == pytest.approx(2e-6 * np.cos(np.pi / 50), rel=1e-9)

    def test_zero_gain_rejected(self):
        with pytest.raises(ValueError, match="gain"):
            input_referred(TimeSeries(np.ones(4), 500.0, Units.VOLT), 0.0)


class TestSnr:
    def test_identical_psds_give_zero(self):
        est = psd(np.sin(np.arange(4096)), 4096, 500.0)
        assert snr_db(est, est) == pytest.approx(0.0, abs=1e-12)

    def test_constructed_power_ratio(self):
        freqs = np.arange(2049) * 500.0 / 4096.0
        sig = PsdEstimate(freqs, np.full(2049, 10.0), 4096, 500.0)
        noise = PsdEstimate(freqs, np.full(2049, -40.0), 4096, 500.0)
        assert snr_db(sig, noise) == pytest.approx(50.0, abs=1e-9)

    def test_zero_noise_is_infinite(self):
        freqs = np.arange(2049) * 500.0 / 4096.0
        sig = PsdEstimate(freqs, np.full(2049, 10.0), 4096, 500.0)
        silent = PsdEstimate(freqs, np.full(2049, -np.inf), 4096, 500.0)
        assert snr_db(sig, silent) == math.inf

    def test_mismatched_transforms_rejected(self):
        a = psd(np.ones(100), 4096, 500.0)
        b = psd(np.ones(100), 2048, 500.0)
        with pytest.raises(ValueError, match="share"):
            snr_db(a, b)

    def test_common_scaling_invariance(self):
        rng = np.random.default_rng(59)
        x, y = rng.standard_normal((2, 4096))
        base = snr_db(psd(x, 4096, 500.0), psd(y, 4096, 500.0))
        scaled = snr_db(psd(3.0 * x, 4096, 500.0), psd(3.0 * y, 4096, 500.0))
        assert scaled == pytest.approx(base, abs=1e-9)

    def test_sinusoid_plus_noise_analytic(self):
        # signal: on-bin unit sinusoid; noise: white sigma. In-band powers are
        # analytic: sine power N A^2/(4 SR); noise E[|X_k|^2] = N sigma^2 per bin
        n, sr = 4096, 500.0
        band = (1.0, 102.0)
        k_sig = 400  # 48.8 Hz, inside the band
        t = np.arange(n)
        amp, sigma = 0.5, 0.03
        sig_est = psd(amp * np.sin(2 * np.pi * k_sig * t / n), n, sr)
        rng = np.random.default_rng(61)
        noise_est = psd(sigma * rng.standard_normal(n), n, sr)
        freqs = sig_est.freqs_hz
        n_bins = int(np.count_nonzero((freqs >= band[0]) & (freqs <= band[1])))
        expect = 10.0 * np.log10(n * amp**2 / (4.0 * n_bins * sigma**2))
        assert snr_db(sig_est, noise_est, band) == pytest.approx(expect, abs=0.5)
