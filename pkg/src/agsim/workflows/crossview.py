"""Aligned ground/aerial capture with projection and illumination checks.

A vehicle drives a straight line under a hovering drone. Both platforms carry
sensors; every synchronous tick must produce one frame per stream bearing the
same tick number, which yields exactly-aligned cross-view pairs. Along the
way the drone's downward camera is spot-checked geometrically (the vehicle
must project into the image as vehicle pixels nearer than the ground) and the
weather presets are swept to confirm each step visibly changes image
intensity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..client import AerialClient, GroundClient
from ..sensors import DOWNWARD_MOUNT, SensorSpec, project_point
from ..snapshot import CLASS_VEHICLE, ActorView
from ..weather import SWEEP_ORDER


@dataclass(frozen=True)
class CrossViewConfig:
    pairs: int = 500
    hover_altitude_cm: float = 4000.0
    vehicle_speed_cm_s: float = 250.0
    width: int = 96
    height: int = 96
    projection_every: int = 25
    ground_margin_m: float = 1.0


@dataclass
class CrossViewReport:
    pairs: int
    max_tick_deviation: int
    projection_checks: int
    projection_hits: int
    sweep_intensity: dict = field(default_factory=dict)
    sweep_min_relative_change: float = 0.0

    def to_dict(self) -> dict:
        return {
            "pairs": self.pairs,
            "max_tick_deviation": self.max_tick_deviation,
            "projection_checks": self.projection_checks,
            "projection_hits": self.projection_hits,
            "sweep_intensity": self.sweep_intensity,
            "sweep_min_relative_change": self.sweep_min_relative_change,
        }


def _drone_view(ground: GroundClient, drone_id: int) -> ActorView:
    t = ground.actor_transform(drone_id)
    return ActorView.build(drone_id, "drone", t["pose"]["position"],
                           t["pose"]["orientation"], t["velocity"], t["bbox"])


def check_projection(ground: GroundClient, aerial: AerialClient,
                     vehicle_id: int, drone_id: int,
                     config: CrossViewConfig) -> bool:
    """Vehicle center must land on vehicle pixels nearer than the ground."""
    depth = aerial.capture_image("depth", config.width, config.height,
                                 "down", drone_id)["data"]
    semantic = aerial.capture_image("semantic", config.width, config.height,
                                    "down", drone_id)["data"]
    view = _drone_view(ground, drone_id)
    spec = SensorSpec(0, drone_id, "depth", config.width, config.height,
                      mount_orientation=tuple(DOWNWARD_MOUNT))
    target = ground.actor_transform(vehicle_id)["pose"]["position"]
    uv = project_point(spec, view, target)
    if uv is None:
        return False
    u, v = int(round(uv[0])), int(round(uv[1]))
    if not (0 <= u < config.width and 0 <= v < config.height):
        return False
    if semantic[v, u] != CLASS_VEHICLE:
        return False
    # The same pixel on an empty scene would hit the ground plane further out.
    slant = float(depth[v, u])
    altitude_m = view.position[2] / 100.0
    return slant < altitude_m / max(np.cos(_ray_angle(spec, u, v)), 1e-9) - config.ground_margin_m


def _ray_angle(spec: SensorSpec, u: int, v: int) -> float:
    """Angle between the pixel ray and the optical axis."""
    tan_h = np.tan(np.pi / 4.0)
    tan_v = tan_h * spec.height / spec.width
    sx = (2.0 * (u + 0.5) / spec.width - 1.0) * tan_h
    sy = (2.0 * (v + 0.5) / spec.height - 1.0) * tan_v
    return float(np.arctan(np.hypot(sx, sy)))


def sweep_weather(ground: GroundClient, aerial: AerialClient, drone_id: int,
                  config: CrossViewConfig) -> dict:
    """Mean downward-image intensity per preset, in sweep order."""
    intensity = {}
    for name in SWEEP_ORDER:
        req = ground.send("set_weather", {"name": name})
        ground.tick()
        ground.recv(req)
        frame = aerial.capture_image("rgb_proxy", config.width, config.height,
                                     "down", drone_id)["data"]
        intensity[name] = float(np.asarray(frame, dtype=np.float64).mean())
    return intensity


def run_crossview(ground: GroundClient, aerial: AerialClient,
                  config: CrossViewConfig = CrossViewConfig()) -> CrossViewReport:
    travel_cm = config.vehicle_speed_cm_s * ground.world_snapshot()["dt"] * config.pairs
    vehicle_id = ground.spawn_actor(
        "vehicle", (-travel_cm / 2.0, 0.0, 75.0), heading=0.0,
        autopilot=False, speed=config.vehicle_speed_cm_s,
    )
    drone_id = ground.spawn_actor("drone", (0.0, 0.0, config.hover_altitude_cm))
    sensors = [
        ground.attach_sensor(vehicle_id, "rgb_proxy", config.width, config.height,
                             mount_position=(250.0, 0.0, 100.0)),
        ground.attach_sensor(drone_id, "rgb_proxy", config.width, config.height,
                             mount_position=(0.0, 0.0, 0.0),
                             mount_orientation=tuple(DOWNWARD_MOUNT)),
        ground.attach_sensor(drone_id, "depth", config.width, config.height,
                             mount_position=(0.0, 0.0, 0.0),
                             mount_orientation=tuple(DOWNWARD_MOUNT)),
        ground.attach_sensor(drone_id, "semantic", config.width, config.height,
                             mount_position=(0.0, 0.0, 0.0),
                             mount_orientation=tuple(DOWNWARD_MOUNT)),
    ]
    ground.set_sync_mode(True)
    report = CrossViewReport(pairs=0, max_tick_deviation=0,
                             projection_checks=0, projection_hits=0)
    try:
        for i in range(config.pairs):
            ground.tick()
            meta = ground.record_meta()
            ticks = [entry["tick"] for entry in meta["streams"].values()]
            if len(ticks) != len(sensors):
                raise ValueError(f"expected {len(sensors)} streams, saw {len(ticks)}")
            report.max_tick_deviation = max(report.max_tick_deviation,
                                            max(ticks) - min(ticks))
            report.pairs += 1
            if i % config.projection_every == 0:
                report.projection_checks += 1
                if check_projection(ground, aerial, vehicle_id, drone_id, config):
                    report.projection_hits += 1

        report.sweep_intensity = sweep_weather(ground, aerial, drone_id, config)
        values = [report.sweep_intensity[name] for name in SWEEP_ORDER]
        changes = [abs(b - a) / max(a, b) for a, b in zip(values, values[1:])]
        report.sweep_min_relative_change = min(changes)

        req = ground.send("set_weather", {"name": "ClearNoon"})
        ground.tick()
        ground.recv(req)
    finally:
        ground.set_sync_mode(False)
        ground.destroy_actor(drone_id)
        ground.destroy_actor(vehicle_id)
    return report
