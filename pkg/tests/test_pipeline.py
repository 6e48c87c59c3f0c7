"""End-to-end pipeline behaviour: detection quality, streaming equivalence."""

import numpy as np
import pytest

from ecgstream.detect import DetectorConfig
from ecgstream.device import AnalogChainConfig, analog_chain, sample_and_frame
from ecgstream.pipeline import (
    BeatPipeline,
    evaluation_start,
    path_a_candidates,
    run_pipeline,
)
from ecgstream.roc import sweep
from ecgstream.signals import (
    BeatTruth,
    EcgTemplate,
    NoiseSpec,
    add_noise,
    generate_ecg,
    rms,
)
from ecgstream.wire import parse_frames

CFG = DetectorConfig(threshold=0.5)


def noisy_subject(hr, seed, duration=30.0, snr_db=20.0, rate=500.0):
    """Synthetic subject at a constructed white-noise SNR, decoded volts + truth."""
    ts, truth = generate_ecg(EcgTemplate.lead_i(), hr, duration, rate)
    sigma = rms(ts) / 10 ** (snr_db / 20.0)
    noisy = add_noise(ts, NoiseSpec(white_sigma_mv=sigma), seed)
    volts = analog_chain(noisy, AnalogChainConfig())
    frames, stats = parse_frames(sample_and_frame(volts))
    assert stats.resync_events == 0
    return np.array([f.voltage_v for f in frames]), truth


def match_beats(detected, truth_idx, tol=25):
    """Greedy one-to-one matching; returns (tp, fp, fn)."""
    j = tp = 0
    for d in detected:
        while j < len(truth_idx) and truth_idx[j] < d - tol:
            j += 1
        if j < len(truth_idx) and abs(int(truth_idx[j]) - int(d)) <= tol:
            tp += 1
            j += 1
    return tp, len(detected) - tp, len(truth_idx) - tp


def visible_truth(truth, pipe_or_warm, n=None):
    warm = pipe_or_warm if isinstance(pipe_or_warm, int) else 750
    idx = truth.r_indices[truth.r_indices >= warm]
    return idx if n is None else idx[idx < n]


class TestBeatPipeline:
    def test_clean_signal_perfect_detection(self):
        values, truth = noisy_subject(60.0, seed=1, snr_db=200.0)
        result = run_pipeline(values, CFG)
        detected = [b.sample_index for b in result.beats]
        tp, fp, fn = match_beats(detected, visible_truth(truth, 750))
        assert fp == 0 and fn == 0
        assert len(result.filtered) == len(values)

    def test_noisy_signal_high_quality(self):
        values, truth = noisy_subject(75.0, seed=2, snr_db=20.0)
        result = run_pipeline(values, CFG)
        detected = [b.sample_index for b in result.beats]
        tp, fp, fn = match_beats(detected, visible_truth(truth, 750))
        assert tp / (tp + fn) >= 0.99
        assert tp / (tp + fp) >= 0.99

    def test_bpm_matches_generator(self):
        values, truth = noisy_subject(75.0, seed=3)
        result = run_pipeline(values, CFG)
        bpms = np.array([r.bpm for r in result.readings])
        truth_bpm = 60.0 * 500.0 / np.mean(np.diff(truth.r_indices))
        assert bpms.size > 20
        assert abs(np.mean(bpms) - truth_bpm) <= 1.0

    def test_delay_compensation_small_residual(self):
        values, truth = noisy_subject(60.0, seed=4, snr_db=200.0)
        result = run_pipeline(values, CFG)
        detected = np.array([b.sample_index for b in result.beats])
        vis = visible_truth(truth, 750)
        offsets = [d - vis[np.argmin(np.abs(vis - d))] for d in detected]
        assert np.max(np.abs(offsets)) <= 12  # well inside the 25-sample window

    def test_streaming_equals_batch(self):
        values, _ = noisy_subject(100.0, seed=5, duration=20.0)
        batch = run_pipeline(values, CFG)
        rng = np.random.default_rng(6)
        for _ in range(3):
            pipe = BeatPipeline(CFG)
            filt, beats, readings = [], [], []
            pos = 0
            while pos < len(values):
                step = int(rng.integers(1, 700))
                r = pipe.feed(values[pos : pos + step])
                filt.append(r.filtered)
                beats += r.beats
                readings += r.readings
                pos += step
            r = pipe.finish()
            beats += r.beats
            readings += r.readings
            assert np.array_equal(np.concatenate(filt), batch.filtered)
            assert beats == batch.beats
            assert readings == batch.readings

    def test_warmup_discards_early_beats(self):
        values, truth = noisy_subject(60.0, seed=7)
        result = run_pipeline(values, CFG)
        first = result.beats[0].sample_index
        assert first >= 750  # 1.5 s at 500 Hz
        assert truth.r_indices[0] < 750  # the generator did place earlier beats

    def test_finish_required_for_tail_beats(self):
        values, truth = noisy_subject(60.0, seed=8, duration=10.0)
        pipe = BeatPipeline(CFG)
        live = pipe.feed(values)
        tail = pipe.finish()
        # the last beat sits inside the filter delay and only appears on finish
        assert len(tail.beats) >= 1
        all_idx = [b.sample_index for b in live.beats + tail.beats]
        tp, fp, fn = match_beats(all_idx, visible_truth(truth, 750))
        assert fn == 0 and fp == 0

    def test_backends_agree_on_beats(self):
        from ecgstream._backend import available_backends

        if len(available_backends()) < 2:
            pytest.skip("only one backend importable")
        values, _ = noisy_subject(120.0, seed=9, duration=15.0)
        a = run_pipeline(values, CFG, backend="pure")
        b = run_pipeline(values, CFG, backend="compiled")
        assert [x.sample_index for x in a.beats] == [x.sample_index for x in b.beats]


class TestPathACandidates:
    def test_candidates_support_perfect_sweep_on_clean_data(self):
        values, truth = noisy_subject(60.0, seed=10, snr_db=200.0)
        cands = path_a_candidates(values)
        vis = BeatTruth(visible_truth(truth, 750, n=len(values)))
        curve = sweep(cands, vis, rate_hz=500.0)
        perfect = [p for p in curve if p.tpr == 1.0 and p.tnr == 1.0]
        assert perfect, "clean data must have a perfect plateau"

    def test_candidate_indices_inside_recording(self):
        values, _ = noisy_subject(75.0, seed=11, duration=10.0)
        cands = path_a_candidates(values)
        assert all(750 <= c.sample_index < len(values) for c in cands)
        assert all(0.0 <= c.height <= 1.0 for c in cands)
