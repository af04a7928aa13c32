"""On-disk tick records: one binary grid per stream plus a JSON sidecar.

Every stream file starts with a 16-byte little-endian header:

    bytes 0-3   magic "AGSR"
    bytes 4-5   format version (uint16)
    bytes 6-7   dtype code (uint16): 1=uint8, 2=float32, 3=float64, 4=int32
    bytes 8-11  width (uint32)
    bytes 12-15 height (uint32)

followed by the row-major payload. Vector payloads are written with height 1
and read back one-dimensional. Records land in ``tick_%08d/`` directories and
overwrite idempotently; rewriting the same record yields identical bytes.
"""

from __future__ import annotations

import json
import struct
import time
from pathlib import Path

import numpy as np

from .errors import WriteError
from .sensors import TickRecord

MAGIC = b"AGSR"
VERSION = 1
HEADER = struct.Struct("<4sHHII")

_DTYPE_CODES = {"uint8": 1, "float32": 2, "float64": 3, "int32": 4}
_CODE_DTYPES = {1: np.uint8, 2: np.float32, 3: np.float64, 4: np.int32}


def tick_dirname(tick: int) -> str:
    return f"tick_{tick:08d}"


def encode_stream(data: np.ndarray) -> bytes:
    """Header plus row-major little-endian payload bytes."""
    if data.ndim == 1:
        h, w = 1, data.shape[0]
    elif data.ndim == 2:
        h, w = data.shape
    else:
        raise WriteError(f"stream payloads must be 1-D or 2-D, got {data.ndim}-D")
    name = data.dtype.name
    if name not in _DTYPE_CODES:
        raise WriteError(f"unsupported stream dtype {name}")
    le = data.astype(data.dtype.newbyteorder("<"), copy=False)
    return HEADER.pack(MAGIC, VERSION, _DTYPE_CODES[name], w, h) + np.ascontiguousarray(le).tobytes()


def decode_stream(blob: bytes) -> np.ndarray:
    if len(blob) < HEADER.size:
        raise WriteError("stream shorter than its header")
    magic, version, code, w, h = HEADER.unpack(blob[: HEADER.size])
    if magic != MAGIC:
        raise WriteError(f"bad stream magic {magic!r}")
    if version != VERSION:
        raise WriteError(f"unsupported stream version {version}")
    if code not in _CODE_DTYPES:
        raise WriteError(f"unknown dtype code {code}")
    dtype = np.dtype(_CODE_DTYPES[code]).newbyteorder("<")
    data = np.frombuffer(blob, dtype=dtype, offset=HEADER.size)
    if data.size != w * h:
        raise WriteError(f"payload size {data.size} does not match {w}x{h} header")
    arr = data.astype(_CODE_DTYPES[code])
    return arr if h == 1 else arr.reshape(h, w)


def stream_filename(sensor_id: int, modality: str) -> str:
    return f"{sensor_id:04d}_{modality}.agsr"


def write_record(record: TickRecord, base_dir) -> float:
    """Write one tick record; returns the wall-clock write latency in seconds."""
    t0 = time.perf_counter()
    out = Path(base_dir) / tick_dirname(record.tick)
    try:
        out.mkdir(parents=True, exist_ok=True)
        manifest = {}
        for sensor_id in sorted(record.streams):
            payload = record.streams[sensor_id]
            fname = stream_filename(sensor_id, payload.modality)
            blob = encode_stream(payload.data)
            (out / fname).write_bytes(blob)
            h, w = (1, payload.data.shape[0]) if payload.data.ndim == 1 else payload.data.shape
            manifest[str(sensor_id)] = {
                "modality": payload.modality,
                "file": fname,
                "width": int(w),
                "height": int(h),
                "dtype": payload.data.dtype.name,
                "tick": payload.tick,
            }
        meta = {
            "tick": record.tick,
            "vehicle_pose": record.vehicle_pose,
            "drone_pose": record.drone_pose,
            "streams": manifest,
        }
        (out / "meta.json").write_text(
            json.dumps(meta, sort_keys=True, separators=(",", ":")) + "\n"
        )
    except OSError as exc:
        raise WriteError(f"failed writing record {record.tick}: {exc}") from exc
    return time.perf_counter() - t0


def read_record(record_dir) -> tuple[dict, dict[int, np.ndarray]]:
    path = Path(record_dir)
    try:
        meta = json.loads((path / "meta.json").read_text())
        streams = {
            int(sid): decode_stream((path / entry["file"]).read_bytes())
            for sid, entry in meta["streams"].items()
        }
    except OSError as exc:
        raise WriteError(f"failed reading record at {path}: {exc}") from exc
    return meta, streams


class DatasetWriter:
    """Synchronous per-tick writer that tracks write latency."""

    def __init__(self, base_dir):
        self.base_dir = Path(base_dir)
        self.latencies_s: list[float] = []
        self.ticks_written = 0

    def write(self, record: TickRecord) -> None:
        self.latencies_s.append(write_record(record, self.base_dir))
        self.ticks_written += 1

    def stats(self) -> dict:
        lat = np.asarray(self.latencies_s)
        if lat.size == 0:
            return {"ticks_written": 0, "write_ms_mean": 0.0, "write_ms_sd": 0.0, "write_ms_max": 0.0}
        return {
            "ticks_written": self.ticks_written,
            "write_ms_mean": float(lat.mean() * 1e3),
            "write_ms_sd": float(lat.std(ddof=1) * 1e3) if lat.size > 1 else 0.0,
            "write_ms_max": float(lat.max() * 1e3),
        }
