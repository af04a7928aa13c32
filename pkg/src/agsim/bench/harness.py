"""Measurement harness driving a live kernel as a single-threaded client.

The run loop mirrors the standard shape: connect and verify, spawn the
workload while the world is free-running, switch to synchronous stepping,
discard a warmup block, then time every measured tick. Memory (process RSS as
the accelerator-memory proxy) and API round-trip latency are sampled on a
fixed wall-clock interval inside the measurement loop. Teardown drops back to
asynchronous mode first so destroys apply without a cooperating ticker, then
verifies the registries returned to their pre-spawn sizes.

All clocks are monotonic nanoseconds; latencies are reported in microseconds.
"""

from __future__ import annotations

import os
import time
from dataclasses import asdict, dataclass, field

import psutil

from ..client import AerialClient, GroundClient
from ..errors import ConnectError, ProtocolError, SimError, StatError
from .profiles import WorkloadProfile, apply_profile
from .stats import harmonic_mean, leak_regression, median_iqr

MIB = 1024 * 1024


def rss_mib(pid: int | None = None) -> float:
    return psutil.Process(pid or os.getpid()).memory_info().rss / MIB


@dataclass
class BenchConfig:
    warmup_ticks: int = 200
    measure_ticks: int = 2000
    mem_interval_s: float = 60.0
    latency_call: str = "actor_transform"
    pid: int | None = None              # kernel process; defaults to this one


@dataclass
class BenchReport:
    profile: str
    warmup_ticks: int
    measure_ticks: int
    frame_rates_hz: list[float] = field(default_factory=list)
    fps_harmonic: float = 0.0
    fps_sd: float = 0.0
    memory_mib: list[float] = field(default_factory=list)
    latency_samples_us: list[float] = field(default_factory=list)
    latency_call: str = ""
    latency_median_us: float = 0.0
    latency_iqr_us: float = 0.0
    error_count: int = 0
    crash_count: int = 0
    actors_before: int = 0
    actors_after: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def run_harness(ground: GroundClient, aerial: AerialClient | None,
                profile: WorkloadProfile, cfg: BenchConfig | None = None) -> BenchReport:
    cfg = cfg or BenchConfig()
    if cfg.warmup_ticks < 0 or cfg.measure_ticks <= 0:
        raise StatError("harness needs a non-negative warmup and a positive measure count")

    report = BenchReport(profile.name, cfg.warmup_ticks, cfg.measure_ticks,
                         latency_call=cfg.latency_call)

    ground.ping()
    if aerial is not None:
        aerial.ping()
    report.actors_before = len(ground.world_snapshot()["actors"])

    workload = apply_profile(profile, ground, aerial)
    latency_target = workload.ego_vehicle or workload.drone

    ground.set_sync_mode(True)
    try:
        for _ in range(cfg.warmup_ticks):
            ground.tick()

        report.memory_mib.append(rss_mib(cfg.pid))
        last_sample = time.monotonic()
        for _ in range(cfg.measure_ticks):
            t0 = time.monotonic_ns()
            try:
                ground.tick()
            except (ConnectError, ProtocolError):
                report.crash_count += 1
                raise
            except SimError:
                report.error_count += 1
                continue
            dt_ns = time.monotonic_ns() - t0
            report.frame_rates_hz.append(1e9 / dt_ns)

            if time.monotonic() - last_sample >= cfg.mem_interval_s:
                last_sample = time.monotonic()
                report.memory_mib.append(rss_mib(cfg.pid))
                report.latency_samples_us.append(
                    _roundtrip_us(ground, cfg.latency_call, latency_target))
        report.memory_mib.append(rss_mib(cfg.pid))
    finally:
        ground.set_sync_mode(False)
        workload.teardown(ground)

    report.actors_after = len(ground.world_snapshot()["actors"])
    report.fps_harmonic, report.fps_sd = harmonic_mean(report.frame_rates_hz)
    if report.latency_samples_us:
        report.latency_median_us, report.latency_iqr_us = median_iqr(report.latency_samples_us)
    return report


def _roundtrip_us(ground: GroundClient, call: str, actor_id: int | None) -> float:
    t0 = time.monotonic_ns()
    if call == "actor_transform" and actor_id is not None:
        ground.actor_transform(actor_id)
    else:
        ground.world_snapshot()
    return (time.monotonic_ns() - t0) / 1e3


@dataclass
class LatencyResult:
    call: str
    warmup: int
    samples_us: list[float]
    median_us: float
    iqr_us: float
    failures: int

    def to_dict(self) -> dict:
        return asdict(self)


def latency_bench(endpoint, call: str, warmup: int = 500, calls: int = 5000,
                  params: dict | None = None,
                  spawn_params: dict | None = None) -> LatencyResult:
    """Round-trip latency of one call type against any `.call(...)` endpoint.

    Spawn benches pair every timed spawn with an untimed destroy so the world
    is left unchanged. Exactly `calls` samples are collected after `warmup`
    discarded rounds. Kernel-backed mutating benches must run against a
    free-running world; in synchronous mode they would wait on a ticker.
    """
    if calls <= 0 or warmup < 0:
        raise StatError("latency bench needs a positive call count")
    params = params or {}
    failures = 0

    def one_round(timed: bool) -> float | None:
        nonlocal failures
        t0 = time.monotonic_ns()
        try:
            result = endpoint.call(call, params)
        except SimError:
            failures += 1
            return None
        elapsed_us = (time.monotonic_ns() - t0) / 1e3
        if call == "spawn_actor":
            endpoint.call("destroy_actor", {"actor_id": result["actor_id"]})
        return elapsed_us if timed else None

    if call == "spawn_actor":
        params = dict(spawn_params or {"kind": "static", "position": [18000.0, 18000.0, 100.0]})

    for _ in range(warmup):
        one_round(timed=False)
    samples: list[float] = []
    while len(samples) < calls:
        if failures > warmup + calls:
            raise StatError(f"latency bench aborted after {failures} failing calls")
        value = one_round(timed=True)
        if value is not None:
            samples.append(value)
    median, iqr = median_iqr(samples)
    return LatencyResult(call, warmup, samples, median, iqr, failures)


@dataclass
class StabilityReport:
    cycles: int
    ticks_per_cycle: int
    memory_mib: list[float]
    fps_per_cycle: list[float]
    slope_mib_per_cycle: float
    r_squared: float
    error_count: int
    crash_count: int
    registry_violations: int
    early_fps_mean: float
    late_fps_mean: float
    verdict: str

    def to_dict(self) -> dict:
        return asdict(self)


def stability_run(ground: GroundClient, aerial: AerialClient | None,
                  profile: WorkloadProfile, cycles: int = 357,
                  ticks_per_cycle: int = 20,
                  leak_threshold_mib: float = 1.0,
                  pid: int | None = None) -> StabilityReport:
    """Repeated spawn/run/destroy cycles with a leak fit over per-cycle RSS.

    Verdict is PASS only with zero API errors, zero crashes, and a fitted
    slope under the threshold. Registry sizes are checked every cycle.
    """
    if cycles < 2:
        raise StatError("stability run needs at least two cycles")
    errors = 0
    crashes = 0
    registry_violations = 0
    memory: list[float] = []
    fps: list[float] = []

    baseline_actors = len(ground.world_snapshot()["actors"])
    try:
        for _ in range(cycles):
            try:
                # Spawns and destroys run against the free-running world; only
                # the timed tick block holds synchronous mode.
                workload = apply_profile(profile, ground, aerial)
                ground.set_sync_mode(True)
                t0 = time.monotonic_ns()
                for _ in range(ticks_per_cycle):
                    ground.tick()
                elapsed = time.monotonic_ns() - t0
                fps.append(ticks_per_cycle / (elapsed / 1e9))
                ground.set_sync_mode(False)
                workload.teardown(ground)
                if len(ground.world_snapshot()["actors"]) != baseline_actors:
                    registry_violations += 1
            except (ConnectError, ProtocolError):
                crashes += 1
                break
            except SimError:
                errors += 1
            memory.append(rss_mib(pid))
    finally:
        ground.set_sync_mode(False)

    slope, r2 = leak_regression(memory)
    early = fps[:30]
    late = fps[-30:]
    passed = (errors == 0 and crashes == 0 and registry_violations == 0
              and slope < leak_threshold_mib)
    return StabilityReport(
        cycles=cycles, ticks_per_cycle=ticks_per_cycle, memory_mib=memory,
        fps_per_cycle=fps, slope_mib_per_cycle=slope, r_squared=r2,
        error_count=errors, crash_count=crashes,
        registry_violations=registry_violations,
        early_fps_mean=sum(early) / len(early) if early else 0.0,
        late_fps_mean=sum(late) / len(late) if late else 0.0,
        verdict="PASS" if passed else "FAIL",
    )
