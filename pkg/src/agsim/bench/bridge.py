"""In-process versus cross-process frame transfer contrast.

Both paths move the same per-frame payload set (default: one 1280x720
single-channel buffer per simulated sensor). The in-process consumer receives
the batch by reference in one call, the way tick records reach co-resident
consumers inside the kernel. The cross-process path serializes every payload
through a loopback socket to a spawned relay process and waits for its ack,
the way a bridged setup must. Reported numbers are per-frame means from the
fastest of several interleaved repeats.
"""

from __future__ import annotations

import multiprocessing
import socket
import struct
import time
from dataclasses import dataclass, field

from ..errors import BridgeError
from ..wire import recv_exact

DEFAULT_COUNTS = (1, 4, 8, 12, 16)
DEFAULT_PAYLOAD_BYTES = 1280 * 720
_U32 = struct.Struct(">I")


class FrameSink:
    """In-process consumer: takes the payload batch by reference."""

    def __init__(self):
        self.frames = 0
        self.payloads = 0
        self.last_batch = None

    def consume(self, batch: list[bytes]) -> None:
        self.frames += 1
        self.payloads += len(batch)
        self.last_batch = batch


def _relay_main(port: int, ready) -> None:
    listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    listener.bind(("127.0.0.1", port))
    listener.listen(1)
    ready.put(listener.getsockname()[1])
    conn, _ = listener.accept()
    conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    try:
        while True:
            header = recv_exact(conn, _U32.size)
            if header is None:
                return
            (count,) = _U32.unpack(header)
            for _ in range(count):
                size_raw = recv_exact(conn, _U32.size)
                (size,) = _U32.unpack(size_raw)
                recv_exact(conn, size)
            conn.sendall(b"\x01")
    except OSError:
        return
    finally:
        conn.close()
        listener.close()


@dataclass
class BridgeResult:
    counts: list[int]
    payload_bytes: int
    frames: int
    in_process_ms: dict[int, float] = field(default_factory=dict)
    cross_process_ms: dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "counts": self.counts,
            "payload_bytes": self.payload_bytes,
            "frames": self.frames,
            "in_process_ms": {str(k): v for k, v in self.in_process_ms.items()},
            "cross_process_ms": {str(k): v for k, v in self.cross_process_ms.items()},
        }


def _run_in_process(sink: FrameSink, payloads: list[bytes], frames: int) -> int:
    t0 = time.perf_counter_ns()
    for _ in range(frames):
        sink.consume(payloads)
    return time.perf_counter_ns() - t0


def _run_cross_process(conn: socket.socket, payloads: list[bytes], frames: int) -> int:
    header = _U32.pack(len(payloads))
    sizes = [_U32.pack(len(p)) for p in payloads]
    t0 = time.perf_counter_ns()
    for _ in range(frames):
        conn.sendall(header)
        for size, payload in zip(sizes, payloads):
            conn.sendall(size)
            conn.sendall(payload)
        ack = conn.recv(1)
        if ack != b"\x01":
            raise BridgeError("relay failed to acknowledge a frame")
    return time.perf_counter_ns() - t0


_CHUNK_FRAMES = 10


def bridge_compare(counts=DEFAULT_COUNTS, payload_bytes: int = DEFAULT_PAYLOAD_BYTES,
                   frames: int = 200, timeout_s: float = 30.0,
                   passes: int = 3) -> BridgeResult:
    """Per-frame transfer cost for each sensor count, both paths.

    The frame budget for each count is spent in small chunks interleaved
    round-robin across all counts, so every count samples the same stretches
    of machine time and a busy patch cannot land on one count and bend the
    curve. The whole schedule runs `passes` times; contention only ever adds
    time, so all numbers are reported from the fastest complete pass, and each
    is still a mean over the full frame budget.
    """
    counts = [int(c) for c in counts]
    if not counts or any(c < 1 for c in counts):
        raise BridgeError("sensor counts must be positive")
    if frames < 1:
        raise BridgeError("at least one frame per measurement")
    if passes < 1:
        raise BridgeError("at least one pass over the schedule")

    result = BridgeResult(counts, payload_bytes, frames)
    buffer = bytes(payload_bytes)
    batches = {n: [buffer] * n for n in counts}
    chunks = [_CHUNK_FRAMES] * (frames // _CHUNK_FRAMES)
    if frames % _CHUNK_FRAMES:
        chunks.append(frames % _CHUNK_FRAMES)
    sink = FrameSink()
    in_ns = [dict.fromkeys(counts, 0) for _ in range(passes)]
    cross_ns = [dict.fromkeys(counts, 0) for _ in range(passes)]

    ready: multiprocessing.Queue = multiprocessing.Queue()
    proc = multiprocessing.Process(target=_relay_main, args=(0, ready), daemon=True)
    proc.start()
    try:
        try:
            port = ready.get(timeout=timeout_s)
        except Exception as exc:
            raise BridgeError(f"relay process did not come up: {exc}") from exc
        conn = socket.create_connection(("127.0.0.1", port), timeout=timeout_s)
        conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        try:
            for p in range(passes):
                for chunk in chunks:
                    for n in counts:
                        in_ns[p][n] += _run_in_process(sink, batches[n], chunk)
                        cross_ns[p][n] += _run_cross_process(conn, batches[n], chunk)
        finally:
            conn.close()
    finally:
        proc.join(timeout=2.0)
        if proc.is_alive():
            proc.terminate()

    if sink.frames != passes * len(counts) * frames:
        raise BridgeError("in-process sink dropped frames")
    best = min(range(passes),
               key=lambda p: sum(cross_ns[p].values()) + sum(in_ns[p].values()))
    result.in_process_ms = {n: in_ns[best][n] / frames / 1e6 for n in counts}
    result.cross_process_ms = {n: cross_ns[best][n] / frames / 1e6 for n in counts}
    return result
