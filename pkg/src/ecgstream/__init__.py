"""Software twin of a single-lead real-time ECG acquisition chain.

Covers the whole path: synthetic annotated ECG, the analog/ADC device
front end, the 7-byte ASCII frame protocol over a paced TCP replay link,
bandpass/notch filter design, streaming dual-path beat detection with
BPM output, PSD/SNR quality checks, and ROC threshold calibration.

Hot streaming kernels run on a compiled extension when available and on
a scipy fallback otherwise; see :mod:`ecgstream._backend`.
"""

from ._backend import active_backend_name, available_backends
from .detect import (
    BeatEvent,
    BpmReading,
    DetectorConfig,
    PathDetector,
    RunningMaxNormalizer,
    bpm_stream,
    detect_path,
    fuse,
)
from .device import AdcModel, AnalogChainConfig, analog_chain, bias_voltage, code_to_voltage, quantize, sample_and_frame
from .filters import (
    FirCoeffs,
    FrequencyResponse,
    IirCascade,
    design_butter_notch,
    design_fir_ls,
    fir_delay_seconds,
    freq_response,
)
from .pipeline import BeatPipeline, run_pipeline
from .roc import Candidate, RocPoint, candidates, optimal_threshold, score_threshold, sweep
from .signals import BeatTruth, EcgTemplate, NoiseSpec, TimeSeries, Units, add_noise, generate_ecg, rms
from .spectral import PsdEstimate, dft, input_referred, psd, snr_db
from .streaming import DerivState, FirState, IirState, align_events, apply_streaming, derivative13, square
from .transport import FrameClient, ReplayServer, replay_connect, replay_serve
from .wire import Frame, StreamParser, StreamStats, encode_frame, parse_frames, throughput_margin

__version__ = "0.1.0"
