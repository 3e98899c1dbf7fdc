"""In-process deterministic network, plus a TCP transport with the same framing.

Endpoints are handlers ``(src, data) -> reply | None``. ``send`` queues a
one-way message (a returned reply is queued back to the sender);
``request`` delivers synchronously and hands the reply to the caller. Both
go through the same fault knobs and end up in the transcript, so every
byte that crossed the network can be inspected afterwards.
"""

import random
import socket
import socketserver
import struct
import threading
from collections import deque
from dataclasses import dataclass
from typing import Callable

Handler = Callable[[str, bytes], "bytes | None"]
Tamper = Callable[[str, str, bytes], "bytes | None"]


class UnknownEndpoint(LookupError):
    pass


class MessageLost(ConnectionError):
    """A synchronous request or its reply was dropped in flight."""


@dataclass
class Faults:
    """Test-only fault injection. All zero means reliable, ordered delivery."""

    drop: float = 0.0
    corrupt: float = 0.0
    reorder: bool = False


class SimNetwork:
    def __init__(self, seed: int = 0, faults: Faults | None = None):
        self.endpoints: dict[str, Handler] = {}
        self.queue: deque[tuple[str, str, bytes]] = deque()
        self.transcript: list[tuple[str, str, bytes]] = []
        self.faults = faults or Faults()
        self.tamper_hooks: list[Tamper] = []
        self.now = 0
        self._rng = random.Random(seed)

    def register(self, name: str, handler: Handler) -> None:
        if name in self.endpoints:
            raise ValueError(f"endpoint {name!r} already registered")
        self.endpoints[name] = handler

    def _handler(self, name: str) -> Handler:
        try:
            return self.endpoints[name]
        except KeyError:
            raise UnknownEndpoint(name) from None

    def _in_flight(self, src: str, dst: str, data: bytes) -> bytes | None:
        for hook in self.tamper_hooks:
            data = hook(src, dst, data)
            if data is None:
                return None
        f = self.faults
        if f.drop and self._rng.random() < f.drop:
            return None
        if f.corrupt and data and self._rng.random() < f.corrupt:
            buf = bytearray(data)
            bit = self._rng.randrange(8 * len(buf))
            buf[bit // 8] ^= 1 << (bit % 8)
            data = bytes(buf)
        return data

    def send(self, src: str, dst: str, data: bytes) -> None:
        self._handler(dst)
        self.transcript.append((src, dst, data))
        delivered = self._in_flight(src, dst, data)
        if delivered is not None:
            self.queue.append((src, dst, delivered))

    def request(self, src: str, dst: str, data: bytes) -> bytes:
        handler = self._handler(dst)
        self.transcript.append((src, dst, data))
        delivered = self._in_flight(src, dst, data)
        if delivered is None:
            raise MessageLost(f"{src} -> {dst}")
        reply = handler(src, delivered)
        if reply is None:
            raise MessageLost(f"{dst} sent no reply")
        self.transcript.append((dst, src, reply))
        reply = self._in_flight(dst, src, reply)
        if reply is None:
            raise MessageLost(f"{dst} -> {src}")
        return reply

    def step(self) -> bool:
        if not self.queue:
            return False
        if self.faults.reorder and len(self.queue) > 1:
            self.queue.rotate(-self._rng.randrange(len(self.queue)))
        src, dst, data = self.queue.popleft()
        reply = self._handler(dst)(src, data)
        if reply is not None and src in self.endpoints:
            self.send(dst, src, reply)
        return True

    def run(self, max_steps: int = 100_000) -> int:
        steps = 0
        while self.step():
            steps += 1
            if steps >= max_steps:
                raise RuntimeError("network did not quiesce")
        return steps


# --------------------------------------------------------------------------
# TCP transport: u32 big-endian frame length, then one encoded WireMessage

_FRAME = struct.Struct(">I")
MAX_FRAME = 1 << 24


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("connection closed mid-frame")
        buf += chunk
    return bytes(buf)


def read_frame(sock: socket.socket) -> bytes:
    (length,) = _FRAME.unpack(_recv_exact(sock, _FRAME.size))
    if length > MAX_FRAME:
        raise ConnectionError(f"frame of {length} bytes exceeds limit")
    return _recv_exact(sock, length)


def write_frame(sock: socket.socket, data: bytes) -> None:
    sock.sendall(_FRAME.pack(len(data)) + data)


class FrameServer(socketserver.ThreadingTCPServer):
    """Each connection is a thread; frames funnel through one lock into ``dispatch``."""

    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], dispatch: Callable[[bytes], bytes]):
        self.dispatch = dispatch
        self.dispatch_lock = threading.Lock()
        super().__init__(address, _FrameHandler)


class _FrameHandler(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        while True:
            try:
                frame = read_frame(self.request)
            except ConnectionError:
                return
            with self.server.dispatch_lock:
                reply = self.server.dispatch(frame)
            write_frame(self.request, reply)


def send_frame(address: tuple[str, int], data: bytes, timeout: float = 10.0) -> bytes:
    with socket.create_connection(address, timeout=timeout) as sock:
        write_frame(sock, data)
        return read_frame(sock)
