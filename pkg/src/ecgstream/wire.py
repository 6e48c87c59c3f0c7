"""Sample frame codec and stream parser.

Each sample travels as exactly 7 ASCII bytes: one integer digit, a dot,
four fractional digits, and a ``\\n`` terminator ("d.dddd\\n").  Values
span 0.0000 to 3.3000 volts.  Bytes per frame times 10 line bits per byte
sets the serial budget checked by :func:`throughput_margin`.

The parser is incremental and self-resynchronizing: chunks may split a
frame anywhere, and malformed data is skipped up to the next ``\\n``
(the only delimiter the format defines) while counting a resync event.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

FRAME_BYTES = 7
VOLTAGE_MAX = 3.3
DEFAULT_PORT = 7660
DEFAULT_BAUD = 115200
BITS_PER_BYTE_ON_WIRE = 10  # start + 8 data + stop

_FRAME_RE = re.compile(rb"\d\.\d{4}")


@dataclass(frozen=True)
class Frame:
    """One decoded sample: a voltage with exactly four decimal digits."""

    voltage_v: float


@dataclass
class StreamStats:
    frames_ok: int = 0
    resync_events: int = 0
    bytes_consumed: int = 0

    def summary(self) -> str:
        return (
            f"frames={self.frames_ok} resyncs={self.resync_events} "
            f"bytes={self.bytes_consumed}"
        )


def encode_frame(voltage_v: float) -> bytes:
    """Render one sample as its 7-byte wire image.

    The value is rounded to 4 decimal places first; if the rounded value
    falls outside [0, 3.3] the sample cannot be framed and is rejected.
    """
    text = f"{voltage_v:.4f}"
    rounded = float(text)
    if not (0.0 <= rounded <= VOLTAGE_MAX):
        raise ValueError(f"voltage {voltage_v!r} outside [0, {VOLTAGE_MAX}] after rounding")
    data = (text + "\n").encode("ascii")
    assert len(data) == FRAME_BYTES
    return data


class StreamParser:
    """Incremental frame parser with skip-to-newline resynchronization.

    Feeding a byte sequence in any chunking yields the same frames and the
    same ok/resync counts as feeding it whole.
    """

    def __init__(self) -> None:
        self._buf = bytearray()
        self.stats = StreamStats()

    def feed(self, data: bytes) -> list[Frame]:
        self.stats.bytes_consumed += len(data)
        self._buf += data
        *segments, tail = self._buf.split(b"\n")
        self._buf = bytearray(tail)
        frames = []
        for seg in segments:
            if _FRAME_RE.fullmatch(seg):
                value = float(seg)
                if value <= VOLTAGE_MAX:
                    frames.append(Frame(value))
                    self.stats.frames_ok += 1
                    continue
            self.stats.resync_events += 1
        return frames

    @property
    def pending_bytes(self) -> int:
        return len(self._buf)


def parse_frames(data: bytes) -> tuple[list[Frame], StreamStats]:
    """Parse a complete buffer in one call (trailing partial frame is dropped)."""
    parser = StreamParser()
    frames = parser.feed(data)
    return frames, parser.stats


def throughput_margin(rate_hz: float, frame_bytes: int, baud: int) -> float:
    """Ratio of link capacity to demand; below 1.0 the link cannot keep up."""
    if rate_hz <= 0 or frame_bytes <= 0 or baud <= 0:
        raise ValueError("rate, frame size, and baud must all be positive")
    return baud / (BITS_PER_BYTE_ON_WIRE * frame_bytes * rate_hz)
