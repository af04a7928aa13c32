"""Workload profiles the harness can spawn against a live kernel.

A profile describes counts and sensor loadout; `apply` performs the spawns as
an ordinary client and returns the handles needed for teardown. Resolutions
default to the full-scale loadout but scale down for desk-size runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..client import AerialClient, GroundClient
from ..errors import ModeError
from ..maps import load_map, pedestrian_path, vehicle_spawn_slots
from ..sensors import DOWNWARD_MOUNT

VEHICLE_Z_CM = 75.0
DRONE_Z_CM = 1500.0

# Eight-sensor ground loadout: front camera triple, rear pair, ranging + nav.
GROUND_SENSOR_SET = (
    ("rgb_proxy", "front"),
    ("depth", "front"),
    ("semantic", "front"),
    ("rgb_proxy", "rear"),
    ("depth", "rear"),
    ("lidar_proxy", "top"),
    ("imu", "body"),
    ("gnss", "body"),
)

_MOUNTS = {
    "front": ((250.0, 0.0, 100.0), (1.0, 0.0, 0.0, 0.0)),
    "rear": ((-250.0, 0.0, 100.0), (0.0, 0.0, 0.0, 1.0)),
    "top": ((0.0, 0.0, 180.0), (1.0, 0.0, 0.0, 0.0)),
    "body": ((0.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0)),
    "down": ((0.0, 0.0, -15.0), tuple(DOWNWARD_MOUNT)),
}


@dataclass(frozen=True)
class WorkloadProfile:
    name: str
    vehicles: int = 0
    pedestrians: int = 0
    drones: int = 0
    ground_sensors: tuple = ()
    aerial_sensors: tuple = ()          # (modality, mount) pairs on the first drone
    sensor_width: int = 1280
    sensor_height: int = 720
    aerial_width: int = 1280
    aerial_height: int = 720
    autopilot: bool = True
    map_name: str = "flat_town"

    def scaled(self, width: int, height: int) -> "WorkloadProfile":
        return replace(self, sensor_width=width, sensor_height=height,
                       aerial_width=width, aerial_height=height)


PROFILES = {
    "idle": WorkloadProfile("idle"),
    "ground_only": WorkloadProfile(
        "ground_only", vehicles=3, pedestrians=2, ground_sensors=GROUND_SENSOR_SET,
    ),
    "moderate_joint": WorkloadProfile(
        "moderate_joint", vehicles=3, pedestrians=2, drones=1,
        ground_sensors=GROUND_SENSOR_SET,
    ),
    "surveillance": WorkloadProfile(
        "surveillance", vehicles=8, drones=1,
        aerial_sensors=(("rgb_proxy", "down"),),
        aerial_width=1920, aerial_height=1080,
    ),
    "endurance": WorkloadProfile(
        "endurance", vehicles=3, pedestrians=2, drones=1,
        ground_sensors=GROUND_SENSOR_SET,
    ),
}


def get_profile(name: str) -> WorkloadProfile:
    if name not in PROFILES:
        raise KeyError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}")
    return PROFILES[name]


@dataclass
class Workload:
    profile: WorkloadProfile
    actor_ids: list[int] = field(default_factory=list)
    sensor_ids: list[int] = field(default_factory=list)
    ego_vehicle: int | None = None
    drone: int | None = None

    def teardown(self, ground: GroundClient) -> None:
        for actor_id in reversed(self.actor_ids):
            ground.destroy_actor(actor_id)
        self.actor_ids.clear()
        self.sensor_ids.clear()


def _flush(ground: GroundClient, pending: list[int]) -> list[dict]:
    """Collect acks for a pipelined mutation batch in either tick mode."""
    try:
        ground.tick()
    except ModeError:
        pass    # free-running: the driver applies the batch on its own tick
    return [ground.recv(req) for req in pending]


def apply_profile(profile: WorkloadProfile, ground: GroundClient,
                  aerial: AerialClient | None = None) -> Workload:
    """Spawn the profile's actors and sensors; returns teardown handles.

    Mutations are pipelined in two batches (spawns, then sensor attaches),
    so the same call works in synchronous and free-running mode; under a
    sync-booted seeded kernel the resulting scene is deterministic.
    """
    workload = Workload(profile)
    map_def = load_map(profile.map_name)

    spawns = []
    if profile.vehicles:
        slots = vehicle_spawn_slots(map_def, profile.vehicles, VEHICLE_Z_CM)
        for pos, heading, idx in slots:
            spawns.append(ground.send("spawn_actor", {
                "kind": "vehicle", "position": pos.tolist(), "heading": -heading,
                "params": {"autopilot": profile.autopilot, "route_index": idx},
            }))

    for i in range(profile.pedestrians):
        path = pedestrian_path(map_def, i)
        start = [float(path[0][0]), float(path[0][1]), 90.0]
        spawns.append(ground.send("spawn_actor", {
            "kind": "pedestrian", "position": start, "heading": 0.0,
            "params": {"path": path.tolist()},
        }))

    for i in range(profile.drones):
        pos = [float(map_def.route[0][0]), float(map_def.route[0][1]), DRONE_Z_CM + 200.0 * i]
        spawns.append(ground.send("spawn_actor", {
            "kind": "drone", "position": pos, "heading": 0.0,
        }))

    workload.actor_ids.extend(ack["actor_id"] for ack in _flush(ground, spawns))
    vehicle_count = profile.vehicles
    if vehicle_count:
        workload.ego_vehicle = workload.actor_ids[0]
    if profile.drones:
        workload.drone = workload.actor_ids[vehicle_count + profile.pedestrians]

    attaches = []
    if profile.ground_sensors and workload.ego_vehicle is not None:
        for modality, mount in profile.ground_sensors:
            pos, quat = _MOUNTS[mount]
            attaches.append(ground.send("attach_sensor", {
                "actor_id": workload.ego_vehicle, "modality": modality,
                "width": profile.sensor_width, "height": profile.sensor_height,
                "mount_position": list(pos), "mount_orientation": list(quat),
            }))

    if profile.aerial_sensors and workload.drone is not None:
        for modality, mount in profile.aerial_sensors:
            pos, quat = _MOUNTS[mount]
            attaches.append(ground.send("attach_sensor", {
                "actor_id": workload.drone, "modality": modality,
                "width": profile.aerial_width, "height": profile.aerial_height,
                "mount_position": list(pos), "mount_orientation": list(quat),
            }))

    if attaches:
        workload.sensor_ids.extend(ack["sensor_id"] for ack in _flush(ground, attaches))

    return workload
