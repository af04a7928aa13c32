"""Multi-stream dataset capture with kernel-side recording.

Spawns a dense traffic scene plus one hovering drone, attaches twelve sensor
streams (eight on the ego vehicle, four on the drone), records a fixed number
of synchronous ticks to disk, then verifies the result: every tick directory
must hold all streams stamped with one tick value, and a content digest makes
re-runs comparable byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from ..bench.profiles import GROUND_SENSOR_SET, WorkloadProfile, apply_profile
from ..client import AerialClient, GroundClient

AERIAL_SENSOR_SET = (
    ("rgb_proxy", "down"),
    ("depth", "down"),
    ("imu", "body"),
    ("gnss", "body"),
)


@dataclass(frozen=True)
class DatasetRunConfig:
    ticks: int = 1000
    vehicles: int = 30
    pedestrians: int = 10
    width: int = 64
    height: int = 64


@dataclass
class DatasetRunReport:
    record_dir: str
    ticks_written: int
    stream_count: int
    max_tick_deviation: int
    write_ms_mean: float
    write_ms_max: float
    digest: str

    def to_dict(self) -> dict:
        return {
            "record_dir": self.record_dir,
            "ticks_written": self.ticks_written,
            "stream_count": self.stream_count,
            "max_tick_deviation": self.max_tick_deviation,
            "write_ms_mean": self.write_ms_mean,
            "write_ms_max": self.write_ms_max,
            "digest": self.digest,
        }


def capture_profile(config: DatasetRunConfig) -> WorkloadProfile:
    return WorkloadProfile(
        "dataset_capture",
        vehicles=config.vehicles,
        pedestrians=config.pedestrians,
        drones=1,
        ground_sensors=GROUND_SENSOR_SET,
        aerial_sensors=AERIAL_SENSOR_SET,
        sensor_width=config.width,
        sensor_height=config.height,
        aerial_width=config.width,
        aerial_height=config.height,
    )


def scan_alignment(record_dir) -> tuple[int, int, int]:
    """(tick dirs, streams per tick, max within-tick tick deviation)."""
    root = Path(record_dir)
    tick_dirs = sorted(d for d in root.iterdir() if d.is_dir() and d.name.startswith("tick_"))
    stream_count = 0
    max_dev = 0
    for tick_dir in tick_dirs:
        meta = json.loads((tick_dir / "meta.json").read_text())
        ticks = [entry["tick"] for entry in meta["streams"].values()]
        if not ticks:
            raise ValueError(f"{tick_dir} holds no streams")
        stream_count = stream_count or len(ticks)
        if len(ticks) != stream_count:
            raise ValueError(f"{tick_dir} holds {len(ticks)} streams, expected {stream_count}")
        max_dev = max(max_dev, max(ticks) - min(ticks))
    return len(tick_dirs), stream_count, max_dev


def dataset_digest(record_dir) -> str:
    """SHA-256 over every tick directory's files, in sorted relative order."""
    root = Path(record_dir)
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file() and path.parent != root:  # tick dirs only: the top
            # level holds run metadata with timings, which legitimately vary.
            digest.update(str(path.relative_to(root)).encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


def run_dataset(ground: GroundClient, aerial: AerialClient, record_dir,
                config: DatasetRunConfig = DatasetRunConfig()) -> DatasetRunReport:
    ground.set_sync_mode(True)
    workload = None
    try:
        workload = apply_profile(capture_profile(config), ground, aerial)
        # Recording toggles are tick-boundary commands, so in synchronous
        # mode they are pipelined: the tick that applies the start is the
        # first recorded one, and the tick that applies the stop records
        # nothing. That yields exactly `ticks` directories.
        req = ground.send("start_recording", {"record_dir": str(record_dir)})
        ground.tick()
        ground.recv(req)
        for _ in range(config.ticks - 1):
            ground.tick()
        req = ground.send("stop_recording", {})
        ground.tick()
        stats = ground.recv(req)
    finally:
        ground.set_sync_mode(False)
        if workload is not None:
            workload.teardown(ground)

    tick_dirs, stream_count, max_dev = scan_alignment(record_dir)
    if tick_dirs != config.ticks:
        raise ValueError(f"recorded {tick_dirs} ticks, expected {config.ticks}")
    return DatasetRunReport(
        record_dir=str(record_dir),
        ticks_written=stats["ticks_written"],
        stream_count=stream_count,
        max_tick_deviation=max_dev,
        write_ms_mean=stats.get("write_ms_mean", 0.0),
        write_ms_max=stats.get("write_ms_max", 0.0),
        digest=dataset_digest(record_dir),
    )
