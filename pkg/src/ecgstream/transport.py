"""Paced TCP replay of frame streams.

A :class:`ReplayServer` plays a sequence of 7-byte frames to a single
client at the acquisition rate (one frame per 2 ms at 500 Hz), pacing
against an absolute schedule so timing error does not accumulate.  The
byte stream carries nothing beyond the frames themselves, exactly as the
serial link would.  One server instance serves one client; later
connection attempts sit in the listen backlog.
"""

from __future__ import annotations

import socket
import threading
import time
from collections.abc import Iterable, Iterator

from .wire import DEFAULT_PORT, FRAME_BYTES, Frame, StreamParser, StreamStats


def parse_endpoint(endpoint: str, default_host: str = "127.0.0.1") -> tuple[str, int]:
    """'host:port' -> (host, port); host may be empty (':7660')."""
    host, sep, port = endpoint.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"endpoint {endpoint!r} is not host:port")
    return host or default_host, int(port)


def frames_from_bytes(data: bytes) -> list[bytes]:
    """Split a raw frame dump into individual 7-byte frames."""
    if len(data) % FRAME_BYTES:
        raise ValueError(f"frame dump length {len(data)} is not a multiple of {FRAME_BYTES}")
    return [data[i : i + FRAME_BYTES] for i in range(0, len(data), FRAME_BYTES)]


class ReplayServer:
    """Serve one client with frames paced at ``rate_hz``.

    The socket is bound at construction so an ephemeral port (``port=0``)
    can be read back from :attr:`port` before :meth:`serve` blocks.
    """

    def __init__(
        self,
        frames: Iterable[bytes],
        rate_hz: float,
        host: str = "127.0.0.1",
        port: int = DEFAULT_PORT,
    ) -> None:
        if rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        self._frames = frames
        self._period = 1.0 / rate_hz
        self._stop = threading.Event()
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            self._sock.bind((host, port))
        except OSError as exc:
            self._sock.close()
            raise ConnectionError(f"cannot bind replay server to {host}:{port}: {exc}") from exc
        self._sock.listen(1)
        self.frames_sent = 0

    @property
    def port(self) -> int:
        return self._sock.getsockname()[1]

    def serve(self, accept_timeout_s: float = 30.0) -> int:
        """Block until one client is served (or the stream/socket ends).

        Returns the number of frames actually written.  The connection is
        closed when the frame source is exhausted.
        """
        self._sock.settimeout(0.2)
        deadline = time.monotonic() + accept_timeout_s
        conn = None
        try:
            while conn is None:
                if self._stop.is_set():
                    return 0
                if time.monotonic() > deadline:
                    raise ConnectionError(
                        f"no client connected to port {self.port} "
                        f"within {accept_timeout_s:.0f}s"
                    )
                try:
                    conn, _addr = self._sock.accept()
                except socket.timeout:
                    continue
            conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            start = time.monotonic()
            for i, frame in enumerate(self._frames):
                if self._stop.is_set():
                    break
                wait = start + i * self._period - time.monotonic()
                if wait > 0:
                    time.sleep(wait)
                try:
                    conn.sendall(frame)
                except OSError:
                    break  # client went away
                self.frames_sent += 1
            return self.frames_sent
        finally:
            if conn is not None:
                try:
                    conn.shutdown(socket.SHUT_RDWR)
                except OSError:
                    pass
                conn.close()
            self.close()

    def stop(self) -> None:
        """Abort pacing/accepting; used to simulate a dying sender."""
        self._stop.set()

    def close(self) -> None:
        self._stop.set()
        self._sock.close()


def replay_serve(
    frames: Iterable[bytes], rate_hz: float, endpoint: str = f"127.0.0.1:{DEFAULT_PORT}"
) -> int:
    """Bind, serve one client to completion, and return the frames sent."""
    host, port = parse_endpoint(endpoint, default_host="")
    return ReplayServer(frames, rate_hz, host=host, port=port).serve()


class FrameClient:
    """Pull-based frame source over a stream socket.

    Iterating yields :class:`~ecgstream.wire.Frame` objects in arrival
    order; the iterator ends cleanly when the sender closes, with parser
    statistics left on :attr:`stats`.
    """

    def __init__(self, endpoint: str, recv_bytes: int = 4096, timeout_s: float = 30.0):
        host, port = parse_endpoint(endpoint)
        self._parser = StreamParser()
        self._recv_bytes = recv_bytes
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.settimeout(timeout_s)
        try:
            self._sock.connect((host, port))
        except OSError as exc:
            self._sock.close()
            raise ConnectionError(f"cannot reach replay server at {endpoint}: {exc}") from exc

    @property
    def stats(self) -> StreamStats:
        return self._parser.stats

    def __iter__(self) -> Iterator[Frame]:
        try:
            while True:
                try:
                    data = self._sock.recv(self._recv_bytes)
                except OSError:
                    return
                if not data:
                    return
                yield from self._parser.feed(data)
        finally:
            self.close()

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


def replay_connect(endpoint: str) -> FrameClient:
    return FrameClient(endpoint)
