"""The single fixed-tick world shared by both RPC surfaces.

One advance applies the tick's queued commands in arrival order (ties broken
ground-before-aerial), steps ground agents at the render step and every drone
through its full physics substep ladder, then rebuilds the immutable snapshot
and captures all attached sensors from it. The world itself is not
thread-safe; the server serializes access (single-writer rule).

Determinism: for a fixed (seed, dt_render, command trace) the per-tick state
sequence is bit-identical, and `serialize_state` canonicalizes the full world
state for digest comparison. Actor ids grow monotonically and are never
reused; destroyed ids move to the retired set.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import weather as weather_mod
from .aerial import (
    DroneState,
    PhysicsConfig,
    integrate_over_tick,
    set_velocity_command,
    substep_count,
)
from .dataset import DatasetWriter
from .errors import (
    ActorNotFound,
    ControlNotEnabled,
    InvalidInput,
    SimError,
    SpawnCollision,
)
from .frames import (
    IDENTITY_QUAT,
    PoseUE,
    ned_to_ue_position,
    ned_to_ue_velocity,
    ue_to_ned_velocity,
    yaw_quat_ue,
)
from .ground import (
    PEDESTRIAN_BBOX_CM,
    VEHICLE_BBOX_CM,
    PedestrianState,
    VehicleState,
    autopilot_step,
    step_pedestrian,
    step_vehicle,
)
from .maps import load_map
from .sensors import SensorSpec, TickRecord, capture_all
from .snapshot import ActorView, DroneView, Snapshot, aabb_overlap

DRONE_BBOX_CM = (30.0, 30.0, 10.0)
STATIC_BBOX_CM = (100.0, 100.0, 100.0)

GROUND_PRIORITY = 0
AERIAL_PRIORITY = 1


@dataclass
class CommandOutcome:
    ok: bool
    value: Any = None
    error: SimError | None = None


@dataclass
class Command:
    """A mutating request waiting for the tick boundary."""

    method: str
    params: dict
    arrival_ns: int = 0
    priority: int = GROUND_PRIORITY
    seq: int = 0
    outcome: CommandOutcome | None = None

    def sort_key(self):
        return (self.arrival_ns, self.priority, self.seq)


@dataclass
class Actor:
    actor_id: int
    kind: str
    bbox: np.ndarray
    state: Any  # VehicleState | PedestrianState | DroneState | PoseUE


@dataclass
class TickResult:
    tick: int
    record: TickRecord
    commands: list[Command] = field(default_factory=list)


class World:
    def __init__(
        self,
        dt_render: float = 0.05,
        dt_phys: float = 0.001,
        seed: int = 0,
        map_name: str = "flat_town",
        physics: PhysicsConfig | None = None,
        world_origin=(0.0, 0.0, 0.0),
        spawn_map_obstacles: bool = True,
    ):
        self.physics = physics if physics is not None else PhysicsConfig(dt_phys=dt_phys)
        # Validated up front: the render tick must hold an integer substep count.
        self.substeps_per_tick = substep_count(dt_render, self.physics.dt_phys)
        self.dt_render = float(dt_render)
        self.map = load_map(map_name)
        self.seed = int(seed)
        self.rng = random.Random(self.seed)
        self.world_origin_cm = np.asarray(world_origin, dtype=float)

        self.tick = 0
        self.sim_time = 0.0
        self.weather = weather_mod.get_preset(weather_mod.DEFAULT_PRESET)
        self.actors: dict[int, Actor] = {}
        self.sensors: dict[int, SensorSpec] = {}
        self.drone_origins: dict[int, np.ndarray] = {}
        self.next_actor_id = 1
        self.next_sensor_id = 1
        self.retired_ids: set[int] = set()
        self.substeps_executed = 0
        self.last_tick_substeps = 0
        self.writer: DatasetWriter | None = None
        self._prev_heading: dict[int, float] = {}

        if spawn_map_obstacles:
            for obs in self.map.obstacles:
                self.spawn_actor("static", obs.center, bbox=obs.half_extents)

        self._snapshot = self._build_snapshot({}, {})
        self.last_record = capture_all(self._snapshot, {})

    # ------------------------------------------------------------------ poses

    def actor_pose(self, actor: Actor) -> PoseUE:
        if actor.kind == "drone":
            d: DroneState = actor.state
            origin = self.drone_origins[actor.actor_id]
            return PoseUE(ned_to_ue_position(d.position, origin), IDENTITY_QUAT.copy())
        if actor.kind == "static":
            return actor.state
        return actor.state.pose

    def actor_velocity_cm_s(self, actor: Actor) -> np.ndarray:
        if actor.kind == "drone":
            return ned_to_ue_velocity(actor.state.velocity)
        if actor.kind == "static":
            return np.zeros(3)
        return actor.state.velocity_cm_s

    # ---------------------------------------------------------------- mutators

    def spawn_actor(self, kind: str, position, heading: float = 0.0,
                    bbox=None, **params) -> int:
        position = np.asarray(position, dtype=float)
        if position.shape != (3,) or not np.all(np.isfinite(position)):
            raise InvalidInput("spawn position must be a finite 3-vector (cm)")

        if kind == "vehicle":
            half = np.asarray(bbox if bbox is not None else VEHICLE_BBOX_CM, dtype=float)
            state: Any = VehicleState(
                position=position.copy(),
                heading=float(heading),
                speed=float(params.get("speed", 0.0)),
                wheelbase=float(params.get("wheelbase", 270.0)),
                max_speed=float(params.get("max_speed", 1500.0)),
                cruise_speed=float(params.get("cruise_speed", 500.0)),
                autopilot=bool(params.get("autopilot", False)),
                route=np.asarray(params["route"], dtype=float)
                if "route" in params and params["route"] is not None
                else self.map.route.copy(),
                route_index=int(params.get("route_index", 0)),
            )
        elif kind == "pedestrian":
            default_path = np.array([
                position[:2],
                position[:2] + np.array([800.0, 0.0]),
                position[:2],
            ])
            half = np.asarray(bbox if bbox is not None else PEDESTRIAN_BBOX_CM, dtype=float)
            state = PedestrianState(
                position=position.copy(),
                speed=float(params.get("speed", 140.0)),
                path=np.asarray(params["path"], dtype=float)
                if "path" in params and params["path"] is not None
                else default_path,
            )
        elif kind == "drone":
            half = np.asarray(bbox if bbox is not None else DRONE_BBOX_CM, dtype=float)
            state = DroneState(drag_coeff=float(params.get("drag_coeff", 0.05)))
        elif kind == "static":
            half = np.asarray(bbox if bbox is not None else STATIC_BBOX_CM, dtype=float)
            state = PoseUE(position.copy(), yaw_quat_ue(-float(heading)))
        else:
            raise InvalidInput(f"unknown actor kind {kind!r}")

        for other in self.actors.values():
            other_pos = self.actor_pose(other).position
            if aabb_overlap(position, half, other_pos, other.bbox):
                raise SpawnCollision(
                    f"spawn of {kind} at {position.tolist()} overlaps actor {other.actor_id}"
                )

        actor_id = self.next_actor_id
        self.next_actor_id += 1
        self.actors[actor_id] = Actor(actor_id, kind, half, state)
        if kind == "drone":
            # The drone's NED frame is anchored at its spawn point.
            self.drone_origins[actor_id] = position.copy()
        return actor_id

    def destroy_actor(self, actor_id: int) -> None:
        if actor_id not in self.actors:
            raise ActorNotFound(f"actor {actor_id} does not exist")
        del self.actors[actor_id]
        self.drone_origins.pop(actor_id, None)
        self._prev_heading.pop(actor_id, None)
        self.retired_ids.add(actor_id)
        for sensor_id in [s for s, spec in self.sensors.items() if spec.parent_id == actor_id]:
            del self.sensors[sensor_id]

    def attach_sensor(self, parent_id: int, modality: str, width: int = 64,
                      height: int = 64, mount_position=(0.0, 0.0, 0.0),
                      mount_orientation=(1.0, 0.0, 0.0, 0.0)) -> int:
        if parent_id not in self.actors:
            raise ActorNotFound(f"sensor parent {parent_id} does not exist")
        sensor_id = self.next_sensor_id
        self.next_sensor_id += 1
        self.sensors[sensor_id] = SensorSpec(
            sensor_id, parent_id, modality, int(width), int(height),
            tuple(float(x) for x in mount_position),
            tuple(float(x) for x in mount_orientation),
        )
        return sensor_id

    def detach_sensor(self, sensor_id: int) -> None:
        if sensor_id not in self.sensors:
            raise ActorNotFound(f"sensor {sensor_id} does not exist")
        del self.sensors[sensor_id]

    def set_weather(self, name: str) -> None:
        self.weather = weather_mod.get_preset(name)

    def set_autopilot(self, actor_id: int, enabled: bool, speed: float | None = None) -> None:
        actor = self._require(actor_id, "vehicle")
        actor.state.autopilot = bool(enabled)
        if speed is not None:
            actor.state.cruise_speed = float(speed)

    def set_velocity(self, actor_id: int | None, v) -> None:
        actor = self._require_drone(actor_id)
        set_velocity_command(actor.state, v, self.physics)

    def enable_api_control(self, actor_id: int | None, enabled: bool) -> None:
        actor = self._require_drone(actor_id)
        actor.state.api_control_enabled = bool(enabled)
        if not enabled:
            actor.state.commanded_velocity = np.zeros(3)
            actor.state.takeoff_target_z = None

    def takeoff_to(self, actor_id: int | None, altitude_m: float) -> None:
        actor = self._require_drone(actor_id)
        if not actor.state.api_control_enabled:
            raise ControlNotEnabled("enable API control before takeoff")
        if altitude_m <= 0 or not np.isfinite(altitude_m):
            raise InvalidInput("takeoff altitude must be positive meters")
        actor.state.takeoff_target_z = -float(altitude_m)

    def start_recording(self, record_dir) -> None:
        self.writer = DatasetWriter(record_dir)

    def stop_recording(self) -> dict:
        stats = self.writer.stats() if self.writer else {"ticks_written": 0}
        self.writer = None
        return stats

    def _require(self, actor_id: int, kind: str) -> Actor:
        actor = self.actors.get(actor_id)
        if actor is None or actor.kind != kind:
            raise ActorNotFound(f"no {kind} with id {actor_id}")
        return actor

    def _require_drone(self, actor_id: int | None) -> Actor:
        if actor_id is None:
            for actor in sorted(self.actors.values(), key=lambda a: a.actor_id):
                if actor.kind == "drone":
                    return actor
            raise ActorNotFound("no drone in the world")
        return self._require(actor_id, "drone")

    # ------------------------------------------------------------------- tick

    def _cmd_spawn_actor(self, p: dict) -> dict:
        actor_id = self.spawn_actor(
            p["kind"], p["position"], heading=p.get("heading", 0.0),
            bbox=p.get("bbox"), **p.get("params", {}),
        )
        return {"actor_id": actor_id}

    def _cmd_destroy_actor(self, p: dict) -> dict:
        self.destroy_actor(p["actor_id"])
        return {"destroyed": p["actor_id"]}

    def _cmd_set_weather(self, p: dict) -> dict:
        self.set_weather(p["name"])
        return {"weather": p["name"]}

    def _cmd_set_autopilot(self, p: dict) -> dict:
        self.set_autopilot(p["actor_id"], p["enabled"], p.get("speed"))
        return {"actor_id": p["actor_id"], "autopilot": p["enabled"]}

    def _cmd_attach_sensor(self, p: dict) -> dict:
        sensor_id = self.attach_sensor(
            p["actor_id"], p["modality"], p.get("width", 64), p.get("height", 64),
            p.get("mount_position", (0.0, 0.0, 0.0)),
            p.get("mount_orientation", (1.0, 0.0, 0.0, 0.0)),
        )
        return {"sensor_id": sensor_id}

    def _cmd_set_velocity(self, p: dict) -> dict:
        self.set_velocity(p.get("actor_id"), p["velocity"])
        return {"ok": True}

    def _cmd_enable_api_control(self, p: dict) -> dict:
        self.enable_api_control(p.get("actor_id"), p["enabled"])
        return {"enabled": p["enabled"]}

    def _cmd_takeoff_to(self, p: dict) -> dict:
        self.takeoff_to(p.get("actor_id"), p["altitude"])
        return {"target_altitude": p["altitude"]}

    def _cmd_start_recording(self, p: dict) -> dict:
        self.start_recording(p["record_dir"])
        return {"recording": str(p["record_dir"])}

    def _cmd_stop_recording(self, p: dict) -> dict:
        return self.stop_recording()

    def apply_command(self, cmd: Command) -> CommandOutcome:
        handler = getattr(self, f"_cmd_{cmd.method}", None)
        if handler is None:
            outcome = CommandOutcome(False, error=InvalidInput(f"unknown command {cmd.method!r}"))
        else:
            try:
                outcome = CommandOutcome(True, value=handler(cmd.params))
            except SimError as exc:
                # A failing command never blocks the tick.
                outcome = CommandOutcome(False, error=exc)
        cmd.outcome = outcome
        return outcome

    def advance(self, commands: list[Command] | None = None) -> TickResult:
        """One render tick: commands, ground step, aerial substeps, capture."""
        ordered = sorted(commands or [], key=Command.sort_key)
        for cmd in ordered:
            self.apply_command(cmd)

        prev_vel_ned = {
            a.actor_id: (
                a.state.velocity.copy() if a.kind == "drone"
                else ue_to_ned_velocity(self.actor_velocity_cm_s(a))
            )
            for a in self.actors.values()
        }
        prev_heading = {
            a.actor_id: a.state.heading
            for a in self.actors.values()
            if a.kind in ("vehicle", "pedestrian")
        }

        self.last_tick_substeps = 0
        for actor in sorted(self.actors.values(), key=lambda a: a.actor_id):
            if actor.kind == "vehicle":
                v: VehicleState = actor.state
                if v.autopilot:
                    steering, speed = autopilot_step(v)
                else:
                    steering, speed = v.steering, v.speed
                step_vehicle(v, steering, speed, self.dt_render)
            elif actor.kind == "pedestrian":
                step_pedestrian(actor.state, self.dt_render)
            elif actor.kind == "drone":
                n = integrate_over_tick(actor.state, self.physics, self.dt_render)
                self.substeps_executed += n
                self.last_tick_substeps += n

        self.tick += 1
        self.sim_time = self.tick * self.dt_render

        angular = {}
        for actor_id, h0 in prev_heading.items():
            if actor_id in self.actors:
                h1 = self.actors[actor_id].state.heading
                angular[actor_id] = np.array([0.0, 0.0, (h1 - h0) / self.dt_render])

        self._snapshot = self._build_snapshot(prev_vel_ned, angular)
        self.last_record = capture_all(self._snapshot, dict(self.sensors))
        if self.writer is not None:
            self.writer.write(self.last_record)
        return TickResult(self.tick, self.last_record, ordered)

    # -------------------------------------------------------------- snapshots

    def _build_snapshot(self, prev_vel_ned: dict, angular: dict) -> Snapshot:
        views = []
        drone_views: dict[int, DroneView] = {}
        for actor in sorted(self.actors.values(), key=lambda a: a.actor_id):
            pose = self.actor_pose(actor)
            views.append(ActorView.build(
                actor.actor_id, actor.kind, pose.position, pose.orientation,
                self.actor_velocity_cm_s(actor), actor.bbox,
            ))
            if actor.kind == "drone":
                d: DroneState = actor.state
                drone_views[actor.actor_id] = DroneView(
                    actor.actor_id, d.position.copy(), d.velocity.copy(),
                    IDENTITY_QUAT.copy(), d.commanded_velocity.copy(),
                    d.saturated, d.api_control_enabled,
                    self.drone_origins[actor.actor_id].copy(),
                )
        return Snapshot(
            tick=self.tick,
            sim_time=self.sim_time,
            dt_render=self.dt_render,
            weather=self.weather,
            ground_z_cm=self.map.ground_z_cm,
            world_origin_cm=self.world_origin_cm.copy(),
            actors=tuple(views),
            drones=drone_views,
            prev_velocity_ned=prev_vel_ned,
            angular_rate_ned=angular,
        )

    @property
    def snapshot(self) -> Snapshot:
        return self._snapshot

    def world_snapshot_payload(self) -> dict:
        snap = self._snapshot
        return {
            "tick": snap.tick,
            "sim_time": snap.sim_time,
            "dt": snap.dt_render,
            "weather": {
                "name": snap.weather.name,
                "illumination": snap.weather.illumination,
                "precipitation": snap.weather.precipitation,
                "fog_density": snap.weather.fog_density,
            },
            "actors": [self._actor_payload(a) for a in snap.actors],
        }

    @staticmethod
    def _actor_payload(view: ActorView) -> dict:
        return {
            "id": view.actor_id,
            "kind": view.kind,
            "pose": {
                "position": [float(x) for x in view.position],
                "orientation": [float(x) for x in view.orientation],
            },
            "velocity": [float(x) for x in view.velocity],
            "bbox": [float(x) for x in view.bbox],
        }

    def actor_transform_payload(self, actor_id: int) -> dict:
        view = self._snapshot.actor(actor_id)
        if view is None:
            raise ActorNotFound(f"actor {actor_id} does not exist")
        return self._actor_payload(view)

    def multirotor_state_payload(self, actor_id: int | None = None) -> dict:
        if actor_id is None:
            ids = sorted(self._snapshot.drones)
            if not ids:
                raise ActorNotFound("no drone in the world")
            actor_id = ids[0]
        view = self._snapshot.drones.get(actor_id)
        if view is None:
            raise ActorNotFound(f"no drone with id {actor_id}")
        return {
            "id": view.actor_id,
            "tick": self._snapshot.tick,
            "position": [float(x) for x in view.position],
            "velocity": [float(x) for x in view.velocity],
            "orientation": [float(x) for x in view.orientation],
            "commanded_velocity": [float(x) for x in view.commanded_velocity],
            "api_control_enabled": view.api_control_enabled,
            "saturated": view.saturated,
        }

    def record_meta_payload(self) -> dict:
        rec = self.last_record
        return {
            "tick": rec.tick,
            "vehicle_pose": rec.vehicle_pose,
            "drone_pose": rec.drone_pose,
            "streams": {
                str(sid): {"modality": p.modality, "tick": p.tick}
                for sid, p in rec.streams.items()
            },
        }

    # ---------------------------------------------------------- serialization

    def serialize_state(self) -> dict:
        """Canonical JSON-able dump of the full mutable state."""
        actors = {}
        for actor in self.actors.values():
            entry: dict[str, Any] = {"kind": actor.kind, "bbox": actor.bbox.tolist()}
            s = actor.state
            if actor.kind == "vehicle":
                entry.update(
                    position=s.position.tolist(), heading=s.heading, speed=s.speed,
                    steering=s.steering, wheelbase=s.wheelbase, max_speed=s.max_speed,
                    route=s.route.tolist() if s.route is not None else None,
                    route_index=s.route_index, autopilot=s.autopilot,
                    cruise_speed=s.cruise_speed,
                )
            elif actor.kind == "pedestrian":
                entry.update(
                    position=s.position.tolist(), heading=s.heading, speed=s.speed,
                    path=s.path.tolist() if s.path is not None else None,
                    path_index=s.path_index,
                )
            elif actor.kind == "drone":
                entry.update(
                    position=s.position.tolist(), velocity=s.velocity.tolist(),
                    commanded_velocity=s.commanded_velocity.tolist(),
                    integral=s.integral.tolist(), prev_velocity=s.prev_velocity.tolist(),
                    drag_coeff=s.drag_coeff, api_control=s.api_control_enabled,
                    saturated=s.saturated, takeoff_target_z=s.takeoff_target_z,
                    ned_origin=self.drone_origins[actor.actor_id].tolist(),
                )
            else:
                entry.update(
                    position=s.position.tolist(), orientation=s.orientation.tolist(),
                )
            actors[str(actor.actor_id)] = entry

        def _plain(obj):
            if isinstance(obj, tuple):
                return [_plain(x) for x in obj]
            return obj

        return {
            "tick": self.tick,
            "sim_time": self.sim_time,
            "dt_render": self.dt_render,
            "dt_phys": self.physics.dt_phys,
            "seed": self.seed,
            "map": self.map.name,
            "weather": self.weather.name,
            "world_origin": self.world_origin_cm.tolist(),
            "next_actor_id": self.next_actor_id,
            "next_sensor_id": self.next_sensor_id,
            "retired_ids": sorted(self.retired_ids),
            "rng": _plain(self.rng.getstate()),
            "actors": actors,
            "sensors": {
                str(sid): {
                    "parent": spec.parent_id, "modality": spec.modality,
                    "width": spec.width, "height": spec.height,
                    "mount_position": list(spec.mount_position),
                    "mount_orientation": list(spec.mount_orientation),
                }
                for sid, spec in self.sensors.items()
            },
        }
