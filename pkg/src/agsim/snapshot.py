"""Immutable per-tick scene view shared by the RPC surface and the sensors.

A snapshot is rebuilt once per tick boundary by the world. Arrays are copies
with the writeable flag cleared, so concurrent readers can never observe a
half-updated scene.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .weather import WeatherPreset

CLASS_SKY = 0
CLASS_GROUND = 1
CLASS_VEHICLE = 2
CLASS_PEDESTRIAN = 3
CLASS_DRONE = 4
CLASS_STATIC = 5

KIND_CLASS = {
    "vehicle": CLASS_VEHICLE,
    "pedestrian": CLASS_PEDESTRIAN,
    "drone": CLASS_DRONE,
    "static": CLASS_STATIC,
}


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class ActorView:
    actor_id: int
    kind: str
    position: np.ndarray        # cm
    orientation: np.ndarray     # (w, x, y, z)
    velocity: np.ndarray        # cm/s
    bbox: np.ndarray            # half extents, cm
    class_id: int

    @staticmethod
    def build(actor_id, kind, position, orientation, velocity, bbox) -> "ActorView":
        return ActorView(
            actor_id,
            kind,
            _frozen(position),
            _frozen(orientation),
            _frozen(velocity),
            _frozen(bbox),
            KIND_CLASS[kind],
        )


@dataclass(frozen=True)
class DroneView:
    actor_id: int
    position: np.ndarray        # NED m, origin at spawn
    velocity: np.ndarray        # NED m/s
    orientation: np.ndarray
    commanded_velocity: np.ndarray
    saturated: bool
    api_control_enabled: bool
    ned_origin_cm: np.ndarray   # spawn point in the ground frame


@dataclass(frozen=True)
class Snapshot:
    tick: int
    sim_time: float
    dt_render: float
    weather: WeatherPreset
    ground_z_cm: float
    world_origin_cm: np.ndarray
    actors: tuple[ActorView, ...] = ()
    drones: dict[int, DroneView] = field(default_factory=dict)
    # NED m/s at the previous tick boundary, for finite-difference IMU.
    prev_velocity_ned: dict[int, np.ndarray] = field(default_factory=dict)
    angular_rate_ned: dict[int, np.ndarray] = field(default_factory=dict)

    def actor(self, actor_id: int) -> ActorView | None:
        for a in self.actors:
            if a.actor_id == actor_id:
                return a
        return None


def aabb_overlap(c1, h1, c2, h2) -> bool:
    """Strict overlap of two axis-aligned boxes given centers and half extents."""
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    h1 = np.asarray(h1, dtype=float)
    h2 = np.asarray(h2, dtype=float)
    return bool(np.all(np.abs(c1 - c2) < h1 + h2))
