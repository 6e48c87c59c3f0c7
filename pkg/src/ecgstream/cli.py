"""Command-line surface.

Subcommands cover the full acquisition flow: ``gen`` writes an annotated
synthetic recording, ``simulate`` runs it through the device front end
into wire frames (to a file or a paced socket), ``stream`` consumes
frames (file or socket), filters, detects beats, and prints live BPM
lines, ``design``/``psd``/``roc`` export filter, spectrum, and
calibration data products.

Machine-readable outputs are CSV files; human summaries go to stderr so
pipelines stay clean.  Every command is deterministic given ``--seed``
and its file inputs (network pacing aside).  On failure, partially
written outputs are removed and the exit code is non-zero.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import os
import queue
import sys
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import detect, device, filters, pipeline, recordings, roc, signals, spectral
from . import transport, wire
from ._backend import active_backend_name

log = logging.getLogger("ecgstream")

DEFAULT_THRESHOLD = 0.67  # midpoint average from `ecgstream roc` on the synthetic corpus


@dataclass(frozen=True)
class RunConfig:
    rate_hz: float = 500.0
    fft_n: int = 4096
    threshold: float = DEFAULT_THRESHOLD
    endpoint: str = f"127.0.0.1:{wire.DEFAULT_PORT}"
    seed: int = 0


def _configure_logging() -> None:
    level = os.environ.get("ECGSTREAM_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr)


@contextlib.contextmanager
def _cleanup_on_error(outputs: list[Path]):
    """Remove any registered output file if the command body raises."""
    try:
        yield
    except BaseException:
        for path in outputs:
            with contextlib.suppress(OSError):
                path.unlink()
        raise


def _say(message: str) -> None:
    print(message, file=sys.stderr)


# ---------------------------------------------------------------- gen

def cmd_gen(args) -> int:
    template = signals.EcgTemplate.lead_ii() if args.lead == "II" else signals.EcgTemplate.lead_i()
    ts, truth = signals.generate_ecg(template, args.hr, args.duration, args.rate_hz)
    spec = signals.NoiseSpec(
        white_sigma_mv=args.noise_white,
        mains_amp_mv=args.noise_mains,
        wander_amp_mv=args.noise_wander,
        wander_freq_hz=args.wander_freq,
    )
    noisy = signals.add_noise(ts, spec, args.seed)
    rec_path = Path(f"{args.out}.csv")
    ann_path = Path(f"{args.out}.ann")
    outputs = [rec_path, ann_path]
    with _cleanup_on_error(outputs):
        recordings.write_recording(rec_path, noisy)
        recordings.write_annotations(ann_path, truth)
    _say(f"wrote {rec_path} ({len(noisy)} samples) and {ann_path} ({len(truth)} beats)")
    return 0


# ---------------------------------------------------------------- simulate

def _device_frames(args) -> bytes:
    ts = recordings.read_recording(args.infile)
    cfg = device.AnalogChainConfig(
        total_gain=args.gain,
        enable_analog_filters=args.analog_filters,
    )
    conditioned = device.analog_chain(ts, cfg)
    return device.sample_and_frame(conditioned, cfg, device.AdcModel(), args.rate_hz)


def cmd_simulate(args) -> int:
    frame_bytes = _device_frames(args)
    n_frames = len(frame_bytes) // wire.FRAME_BYTES
    if args.serve:
        host, port = transport.parse_endpoint(args.serve, default_host="")
        server = transport.ReplayServer(
            transport.frames_from_bytes(frame_bytes), args.rate_hz, host=host, port=port
        )
        _say(f"serving {n_frames} frames at {args.rate_hz:g} Hz on port {server.port}")
        sent = server.serve()
        _say(f"served {sent} frames")
        return 0
    if not args.out:
        raise ValueError("simulate needs --out FILE or --serve ENDPOINT")
    out = Path(args.out)
    with _cleanup_on_error([out]):
        out.write_bytes(frame_bytes)
    _say(f"wrote {out} ({n_frames} frames, {len(frame_bytes)} bytes)")
    return 0


# ---------------------------------------------------------------- stream

def _frame_values_from_file(path: str, parser: wire.StreamParser, chunk_bytes: int = 4096):
    with open(path, "rb") as fh:
        while True:
            data = fh.read(chunk_bytes)
            if not data:
                return
            frames = parser.feed(data)
            if frames:
                yield np.array([f.voltage_v for f in frames])


def _frame_values_from_socket(endpoint: str, stats_out: list):
    """Reader thread + bounded queue (back-pressure: a slow consumer stalls recv)."""
    frame_queue: queue.Queue = queue.Queue(maxsize=4096)
    error: list[BaseException] = []

    def reader() -> None:
        try:
            client = transport.replay_connect(endpoint)
            stats_out.append(client.stats)
            for frame in client:
                frame_queue.put(frame.voltage_v)
        except BaseException as exc:  # surfaced after the queue drains
            error.append(exc)
        finally:
            frame_queue.put(None)

    thread = threading.Thread(target=reader, name="frame-reader", daemon=True)
    thread.start()

    done = False
    while not done:
        values = [frame_queue.get()]
        if values[0] is None:
            break
        while True:
            try:
                nxt = frame_queue.get_nowait()
            except queue.Empty:
                break
            if nxt is None:
                done = True
                break
            values.append(nxt)
        yield np.array(values, dtype=np.float64)
    thread.join()
    if error:
        raise error[0]


def cmd_stream(args) -> int:
    if bool(args.endpoint) == bool(args.infile):
        raise ValueError("stream needs exactly one of --endpoint or --in")

    parser = wire.StreamParser()
    stats_holder: list[wire.StreamStats] = []
    if args.endpoint:
        chunks = _frame_values_from_socket(args.endpoint, stats_holder)
    else:
        chunks = _frame_values_from_file(args.infile, parser)
        stats_holder.append(parser.stats)

    outputs: list[Path] = []
    with _cleanup_on_error(outputs):
        if args.raw:
            raw_path = Path(f"{args.out}.raw.csv")
            outputs.append(raw_path)
            decoded: list[np.ndarray] = list(chunks)
            values = np.concatenate(decoded) if decoded else np.empty(0)
            recordings.write_recording(
                raw_path, signals.TimeSeries(values, args.rate_hz, signals.Units.VOLT)
            )
            _say(f"wrote {raw_path} ({len(values)} samples)")
        else:
            cfg = detect.DetectorConfig(threshold=args.threshold)
            pipe = pipeline.BeatPipeline(cfg, args.rate_hz)
            filtered_parts: list[np.ndarray] = []
            beats: list[detect.BeatEvent] = []
            readings: list[detect.BpmReading] = []

            def consume(result: pipeline.PipelineResult) -> None:
                filtered_parts.append(result.filtered)
                beats.extend(result.beats)
                readings.extend(result.readings)
                for r in result.readings:
                    print(f"BPM {r.bpm:.2f}", flush=True)

            for chunk in chunks:
                consume(pipe.feed(chunk))
            consume(pipe.finish())

            filtered = np.concatenate(filtered_parts) if filtered_parts else np.empty(0)
            filt_path = Path(f"{args.out}.filtered.csv")
            beats_path = Path(f"{args.out}.beats.csv")
            outputs += [filt_path, beats_path]
            recordings.write_recording(
                filt_path, signals.TimeSeries(filtered, args.rate_hz, signals.Units.VOLT)
            )
            _write_beats_csv(beats_path, beats, readings, args.rate_hz)
            _say(f"wrote {filt_path} and {beats_path} ({len(beats)} beats)")

    if stats_holder:
        _say(stats_holder[0].summary())
    return 0


def _write_beats_csv(path: Path, beats, readings, rate_hz: float) -> None:
    by_index = {r.at_index: r.bpm for r in readings}
    with open(path, "w") as fh:
        fh.write("sample_index,time_s,bpm\n")
        for b in beats:
            bpm = by_index.get(b.sample_index)
            bpm_text = "" if bpm is None else f"{bpm:.4f}"
            fh.write(f"{b.sample_index},{b.sample_index / rate_hz:.4f},{bpm_text}\n")


# ---------------------------------------------------------------- design

def cmd_design(args) -> int:
    if args.kind == "fir":
        filt = filters.design_fir_ls(
            length=args.fir_length,
            pass_lo_hz=args.pass_lo,
            pass_hi_hz=args.pass_hi,
            rate_hz=args.rate_hz,
        )
    else:
        filt = filters.design_butter_notch(
            order=args.notch_order,
            center_hz=args.notch_center,
            stop_band=(args.stop_lo, args.stop_hi),
            rate_hz=args.rate_hz,
        )
    outputs = [Path(args.out)]
    with _cleanup_on_error(outputs):
        filters.save_coeffs(args.out, filt)
        if args.response:
            outputs.append(Path(args.response))
            grid = np.arange(0.0, args.rate_hz / 2.0 + 1e-9, 0.05)
            filters.save_response_csv(args.response, filters.freq_response(filt, grid))
    _say(f"wrote {args.out}" + (f" and {args.response}" if args.response else ""))
    return 0


# ---------------------------------------------------------------- psd

def _load_psd_input(path: str, args) -> spectral.PsdEstimate:
    ts = recordings.read_recording(path)
    if args.input_referred_gain:
        ts = spectral.input_referred(ts, args.input_referred_gain)
    values = ts.values
    skip = min(max(len(values) - args.fft_n, 0), int(round(1.5 * ts.rate_hz)))
    return spectral.psd(values[skip:], args.fft_n, ts.rate_hz)


def cmd_psd(args) -> int:
    est = _load_psd_input(args.infile, args)
    outputs = [Path(args.out)]
    with _cleanup_on_error(outputs):
        spectral.save_psd_csv(args.out, est)
        if args.noise:
            noise_est = _load_psd_input(args.noise, args)
            lo, hi = args.band
            value = spectral.snr_db(est, noise_est, (lo, hi))
            print(f"snr_db={value:.4f} band={lo:g}-{hi:g}")
    _say(f"wrote {args.out} ({len(est.psd_db)} bins)")
    return 0


# ---------------------------------------------------------------- roc

def cmd_roc(args) -> int:
    curves = []
    outputs: list[Path] = []
    with _cleanup_on_error(outputs):
        for i, prefix in enumerate(args.subjects):
            ts = recordings.read_recording(f"{prefix}.csv")
            truth = recordings.read_annotations(f"{prefix}.ann")
            cands = pipeline.path_a_candidates(ts.values, ts.rate_hz)
            start = pipeline.evaluation_start(ts.rate_hz)
            visible = signals.BeatTruth(truth.r_indices[truth.r_indices >= start])
            curve = roc.sweep(cands, visible, rate_hz=ts.rate_hz)
            curves.append(curve)
            if args.out:
                path = Path(f"{args.out}.s{i}.roc.csv")
                outputs.append(path)
                roc.save_roc_csv(path, curve)
    result = roc.optimal_threshold(curves)
    print(result.summary())
    if result.failed_subjects:
        _say(f"subjects with no perfect threshold: {result.failed_subjects}")
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    run = RunConfig()
    parser = argparse.ArgumentParser(
        prog="ecgstream",
        description="Single-lead ECG acquisition twin: generate, simulate, stream, analyze.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s (backend: {active_backend_name()})"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_rate(p):
        p.add_argument("--rate-hz", type=float, default=run.rate_hz, help="sample rate")

    p = sub.add_parser("gen", help="write a synthetic annotated recording")
    add_rate(p)
    p.add_argument("--hr", type=float, default=60.0, help="heart rate in BPM")
    p.add_argument("--duration", type=float, default=60.0, help="seconds")
    p.add_argument("--lead", choices=["I", "II"], default="I")
    p.add_argument("--seed", type=int, default=run.seed)
    p.add_argument("--noise-white", type=float, default=0.0, help="white sigma, mV")
    p.add_argument("--noise-mains", type=float, default=0.0, help="50 Hz amplitude, mV")
    p.add_argument("--noise-wander", type=float, default=0.0, help="wander amplitude, mV")
    p.add_argument("--wander-freq", type=float, default=0.3, help="wander frequency, Hz")
    p.add_argument("--out", required=True, help="output prefix (.csv + .ann)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("simulate", help="device front end: recording -> wire frames")
    add_rate(p)
    p.add_argument("--in", dest="infile", required=True, help="recording file (mV)")
    p.add_argument("--out", help="frame dump file")
    p.add_argument("--serve", metavar="ENDPOINT", help="serve paced frames on host:port")
    p.add_argument("--gain", type=float, default=500.0)
    p.add_argument("--analog-filters", action="store_true",
                   help="model the analog HP/notch/LP stages (input must be at 5 kHz)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stream", help="consume frames, filter, detect beats, print BPM")
    add_rate(p)
    p.add_argument("--endpoint", help="connect to a replay server (host:port)")
    p.add_argument("--in", dest="infile", help="frame dump file")
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--threshold", type=float, default=run.threshold)
    p.add_argument("--raw", action="store_true", help="bypass filters, emit decoded trace")
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("design", help="export filter coefficients and responses")
    add_rate(p)
    p.add_argument("--kind", choices=["fir", "notch"], required=True)
    p.add_argument("--out", required=True, help="coefficient file")
    p.add_argument("--response", help="response CSV file")
    p.add_argument("--fir-length", type=int, default=500)
    p.add_argument("--pass-lo", type=float, default=1.0)
    p.add_argument("--pass-hi", type=float, default=102.0)
    p.add_argument("--notch-order", type=int, default=6)
    p.add_argument("--notch-center", type=float, default=50.0)
    p.add_argument("--stop-lo", type=float, default=48.0)
    p.add_argument("--stop-hi", type=float, default=52.0)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("psd", help="power spectral density and SNR report")
    p.add_argument("--in", dest="infile", required=True, help="recording file")
    p.add_argument("--out", required=True, help="PSD CSV file")
    p.add_argument("--noise", help="noise recording for the SNR report")
    p.add_argument("--fft-n", type=int, default=run.fft_n)
    p.add_argument("--band", type=_parse_band, default=spectral.DEFAULT_SNR_BAND,
                   metavar="LO:HI", help="SNR band in Hz (default 1:102)")
    p.add_argument("--input-referred-gain", type=float, default=0.0,
                   help="refer inputs back through this gain before the PSD")
    p.set_defaults(func=cmd_psd)

    p = sub.add_parser("roc", help="threshold sweep and calibration over subjects")
    p.add_argument("--subjects", nargs="+", required=True,
                   help="recording prefixes (PREFIX.csv + PREFIX.ann)")
    p.add_argument("--out", help="output prefix for per-subject ROC CSVs")
    p.set_defaults(func=cmd_roc)

    return parser


def _parse_band(text: str) -> tuple[float, float]:
    lo, _, hi = text.partition(":")
    return float(lo), float(hi)


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, ConnectionError) as exc:
        print(f"ecgstream {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
