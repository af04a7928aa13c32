"""Command-line entry points: serve a kernel, run benches and workflows.

`serve` exposes the two RPC endpoints for external clients and prints one
JSON line with the bound addresses once ready. The bench and workflow
commands embed their own kernel on ephemeral ports and emit a JSON report.
"""

from __future__ import annotations

import argparse
import json
import sys
import threading

import numpy as np

from .aerial import PhysicsConfig
from .bench import (
    BenchConfig,
    bridge_compare,
    get_profile,
    latency_bench,
    run_harness,
    stability_run,
)
from .embed import EmbeddedSim
from .server import SimServer
from .workflows import (
    CrossViewConfig,
    DatasetRunConfig,
    LandingConfig,
    RlEnv,
    RlEnvConfig,
    run_crossview,
    run_dataset,
    run_landing,
)
from .world import World


def _emit(report: dict, path: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _world_kwargs(args) -> dict:
    return {
        "dt_render": args.dt,
        "physics": PhysicsConfig(dt_phys=args.physics_dt),
        "seed": args.seed,
        "map_name": args.map,
    }


def cmd_serve(args) -> int:
    world = World(**_world_kwargs(args))
    if args.record_dir:
        world.start_recording(args.record_dir)
    server = SimServer(world, host=args.host, ground_port=args.ground_port,
                       aerial_port=args.aerial_port, realtime=args.realtime,
                       sync_start=args.sync)
    server.start()
    print(json.dumps({
        "ground": list(server.ground_address),
        "aerial": list(server.aerial_address),
        "dt": world.dt_render,
        "seed": world.seed,
    }), flush=True)
    try:
        threading.Event().wait()
    except KeyboardInterrupt:
        pass
    finally:
        server.close()
    return 0


def cmd_bench_run(args) -> int:
    profile = get_profile(args.profile)
    if args.width and args.height:
        profile = profile.scaled(args.width, args.height)
    cfg = BenchConfig(warmup_ticks=args.warmup, measure_ticks=args.ticks,
                      mem_interval_s=args.mem_interval)
    with EmbeddedSim(**_world_kwargs(args)) as sim:
        report = run_harness(sim.ground(), sim.aerial(), profile, cfg)
    out = report.to_dict()
    if not args.keep_series:
        out.pop("frame_rates_hz", None)
        out.pop("latency_samples_us", None)
    _emit(out, args.json)
    return 0


def cmd_bench_latency(args) -> int:
    with EmbeddedSim(**_world_kwargs(args)) as sim:
        ground = sim.ground()
        params = {}
        if args.call == "actor_transform":
            actor_id = ground.spawn_actor("static", (18000.0, -18000.0, 100.0))
            params = {"actor_id": actor_id}
        result = latency_bench(ground, args.call, warmup=args.warmup,
                               calls=args.calls, params=params)
    out = result.to_dict()
    if not args.keep_series:
        out.pop("samples_us", None)
    _emit(out, args.json)
    return 0


def cmd_bench_bridge(args) -> int:
    counts = tuple(int(c) for c in args.counts.split(","))
    results = bridge_compare(counts=counts, frames=args.frames,
                             payload_bytes=args.payload_bytes)
    _emit({"results": [r.to_dict() for r in results]}, args.json)
    return 0


def cmd_bench_stability(args) -> int:
    profile = get_profile(args.profile).scaled(args.width, args.height)
    with EmbeddedSim(**_world_kwargs(args)) as sim:
        report = stability_run(sim.ground(), sim.aerial(), profile,
                               cycles=args.cycles,
                               ticks_per_cycle=args.ticks_per_cycle)
    out = report.to_dict()
    if not args.keep_series:
        out.pop("memory_mib", None)
        out.pop("fps_per_cycle", None)
    _emit(out, args.json)
    return 0 if report.verdict == "PASS" else 1


def cmd_workflow_landing(args) -> int:
    with EmbeddedSim(**_world_kwargs(args)) as sim:
        report = run_landing(sim.ground(), sim.aerial(), LandingConfig())
    if args.csv:
        report.write_csv(args.csv)
    _emit(report.to_dict(), args.json)
    return 0 if report.success else 1


def cmd_workflow_dataset(args) -> int:
    cfg = DatasetRunConfig(ticks=args.ticks, vehicles=args.vehicles,
                           pedestrians=args.pedestrians,
                           width=args.width, height=args.height)
    with EmbeddedSim(**_world_kwargs(args)) as sim:
        report = run_dataset(sim.ground(), sim.aerial(), args.record_dir, cfg)
    _emit(report.to_dict(), args.json)
    return 0


def cmd_workflow_crossview(args) -> int:
    cfg = CrossViewConfig(pairs=args.pairs)
    with EmbeddedSim(**_world_kwargs(args)) as sim:
        report = run_crossview(sim.ground(), sim.aerial(), cfg)
    _emit(report.to_dict(), args.json)
    return 0 if report.max_tick_deviation == 0 else 1


def cmd_workflow_rl_demo(args) -> int:
    rng = np.random.default_rng(args.seed)
    cfg = RlEnvConfig(max_steps=args.steps)
    with EmbeddedSim(**_world_kwargs(args)) as sim:
        env = RlEnv(sim.ground(), sim.aerial(), cfg)
        episodes = []
        try:
            for episode in range(args.episodes):
                env.reset(seed=args.seed + episode)
                total = 0.0
                steps = 0
                done = False
                while not done:
                    action = rng.uniform(-1.0, 1.0, size=3) * cfg.v_max_m_s / 2.0
                    _, reward, done, info = env.step(action)
                    total += reward
                    steps += 1
                episodes.append({"seed": args.seed + episode,
                                 "steps": steps, "return": total,
                                 "collision": info["collision"]})
        finally:
            env.close()
    _emit({"episodes": episodes}, args.json)
    return 0


def _add_world_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dt", type=float, default=0.05, help="render tick (s)")
    p.add_argument("--physics-dt", type=float, default=0.001,
                   help="aerial physics substep (s)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--map", default="flat_town")


def _add_report_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", help="also write the report to this file")
    p.add_argument("--keep-series", action="store_true",
                   help="keep raw sample series in the report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agsim")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run a kernel for external clients")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--ground-port", type=int, default=2000)
    serve.add_argument("--aerial-port", type=int, default=41451)
    serve.add_argument("--realtime", action="store_true",
                       help="pace asynchronous ticks to wall-clock time")
    serve.add_argument("--sync", action="store_true",
                       help="boot in synchronous mode: no tick until a client asks")
    serve.add_argument("--record-dir", help="record every tick to this dataset directory")
    _add_world_args(serve)
    serve.set_defaults(func=cmd_serve)

    bench = sub.add_parser("bench", help="measurement harnesses")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)

    run = bench_sub.add_parser("run", help="frame-rate harness on one profile")
    run.add_argument("--profile", default="ground_only")
    run.add_argument("--width", type=int, default=0)
    run.add_argument("--height", type=int, default=0)
    run.add_argument("--warmup", type=int, default=200)
    run.add_argument("--ticks", type=int, default=2000)
    run.add_argument("--mem-interval", type=float, default=60.0)
    _add_world_args(run)
    _add_report_args(run)
    run.set_defaults(func=cmd_bench_run)

    lat = bench_sub.add_parser("latency", help="API round-trip latency")
    lat.add_argument("--call", default="actor_transform",
                     choices=["actor_transform", "world_snapshot",
                              "spawn_actor", "ping"])
    lat.add_argument("--warmup", type=int, default=500)
    lat.add_argument("--calls", type=int, default=5000)
    _add_world_args(lat)
    _add_report_args(lat)
    lat.set_defaults(func=cmd_bench_latency)

    bridge = bench_sub.add_parser("bridge", help="in- vs cross-process hand-off")
    bridge.add_argument("--counts", default="1,4,8,12,16")
    bridge.add_argument("--frames", type=int, default=200)
    bridge.add_argument("--payload-bytes", type=int, default=1280 * 720)
    _add_report_args(bridge)
    bridge.set_defaults(func=cmd_bench_bridge)

    stab = bench_sub.add_parser("stability", help="spawn/destroy endurance run")
    stab.add_argument("--profile", default="endurance")
    stab.add_argument("--cycles", type=int, default=357)
    stab.add_argument("--ticks-per-cycle", type=int, default=20)
    stab.add_argument("--width", type=int, default=64)
    stab.add_argument("--height", type=int, default=64)
    _add_world_args(stab)
    _add_report_args(stab)
    stab.set_defaults(func=cmd_bench_stability)

    wf = sub.add_parser("workflow", help="end-to-end reference workflows")
    wf_sub = wf.add_subparsers(dest="workflow_command", required=True)

    landing = wf_sub.add_parser("landing", help="land a drone on a moving vehicle")
    landing.add_argument("--csv", help="write the per-tick trajectory here")
    _add_world_args(landing)
    _add_report_args(landing)
    landing.set_defaults(func=cmd_workflow_landing)

    dataset = wf_sub.add_parser("dataset", help="record an aligned multi-stream dataset")
    dataset.add_argument("--record-dir", required=True)
    dataset.add_argument("--ticks", type=int, default=1000)
    dataset.add_argument("--vehicles", type=int, default=30)
    dataset.add_argument("--pedestrians", type=int, default=10)
    dataset.add_argument("--width", type=int, default=64)
    dataset.add_argument("--height", type=int, default=64)
    _add_world_args(dataset)
    _add_report_args(dataset)
    dataset.set_defaults(func=cmd_workflow_dataset)

    crossview = wf_sub.add_parser("crossview", help="aligned ground/aerial capture")
    crossview.add_argument("--pairs", type=int, default=500)
    _add_world_args(crossview)
    _add_report_args(crossview)
    crossview.set_defaults(func=cmd_workflow_crossview)

    rl = wf_sub.add_parser("rl-demo", help="random-policy episode smoke run")
    rl.add_argument("--episodes", type=int, default=1)
    rl.add_argument("--steps", type=int, default=100)
    _add_world_args(rl)
    _add_report_args(rl)
    rl.set_defaults(func=cmd_workflow_rl_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
