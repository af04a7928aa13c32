"""Analytic sensor suite rendered against the tick snapshot.

Cameras are ideal pinholes with a 90 degree horizontal field of view, ray-cast
against the ground plane and actor bounding boxes; missed rays carry +inf
range. All sensors attached to a tick are sampled from the same immutable
snapshot, so their tick indices are equal by construction. Rays skip the
sensor's own parent actor.

Camera basis in the ground frame: forward is the rotated +X axis, image
columns advance toward the rotated +Y (right), image rows advance toward the
rotated -Z. The stock downward mount points forward straight down, keeps
columns along world +Y, and rows along world -X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ActorNotFound, InvalidInput
from .frames import (
    IDENTITY_QUAT,
    quat_matrix,
    quat_multiply,
    ue_to_ned_position,
    ue_to_ned_quat,
    ue_to_ned_velocity,
)
from .snapshot import ActorView, Snapshot

MODALITIES = ("rgb_proxy", "depth", "semantic", "lidar_proxy", "imu", "gnss")

HORIZONTAL_FOV_RAD = math.pi / 2.0
LIDAR_RAYS = 720
GRAVITY = 9.81

# Per-class base albedo for the intensity proxy; sky stays black.
ALBEDO = np.array([0.0, 0.4, 0.8, 0.6, 0.7, 0.5])
SHADING_FALLOFF_M = 100.0

FORWARD_MOUNT = np.array([1.0, 0.0, 0.0, 0.0])
# Pitch the optical axis straight down (rotation about +Y by 90 degrees).
DOWNWARD_MOUNT = np.array([math.sqrt(0.5), 0.0, math.sqrt(0.5), 0.0])


@dataclass(frozen=True)
class SensorSpec:
    sensor_id: int
    parent_id: int
    modality: str
    width: int = 64
    height: int = 64
    mount_position: tuple[float, float, float] = (0.0, 0.0, 0.0)   # cm, parent frame
    mount_orientation: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise InvalidInput(f"unknown modality {self.modality!r}")
        if self.width < 1 or self.height < 1:
            raise InvalidInput("resolution must be positive")


@dataclass(frozen=True)
class StreamPayload:
    sensor_id: int
    modality: str
    tick: int
    data: np.ndarray


@dataclass(frozen=True)
class TickRecord:
    tick: int
    streams: dict[int, StreamPayload] = field(default_factory=dict)
    vehicle_pose: dict | None = None
    drone_pose: dict | None = None


def camera_pose(spec: SensorSpec, parent: ActorView) -> tuple[np.ndarray, np.ndarray]:
    rot = quat_matrix(parent.orientation)
    pos = parent.position + rot @ np.asarray(spec.mount_position, dtype=float)
    q = quat_multiply(parent.orientation, np.asarray(spec.mount_orientation, dtype=float))
    return pos, q


def camera_rays(spec: SensorSpec, parent: ActorView) -> tuple[np.ndarray, np.ndarray]:
    """Unit ray directions through every pixel center, row-major (h, w, 3)."""
    pos, q = camera_pose(spec, parent)
    rot = quat_matrix(q)
    fwd, right, up = rot[:, 0], rot[:, 1], rot[:, 2]
    w, h = spec.width, spec.height
    tan_h = math.tan(HORIZONTAL_FOV_RAD / 2.0)
    tan_v = tan_h * h / w
    sx = (2.0 * (np.arange(w) + 0.5) / w - 1.0) * tan_h
    sy = (2.0 * (np.arange(h) + 0.5) / h - 1.0) * tan_v
    dirs = (
        fwd[None, None, :]
        + sx[None, :, None] * right[None, None, :]
        - sy[:, None, None] * up[None, None, :]
    )
    dirs /= np.linalg.norm(dirs, axis=2, keepdims=True)
    return pos, dirs


def raycast(origin: np.ndarray, dirs: np.ndarray, snap: Snapshot,
            exclude_actor: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Nearest hit per ray: (ranges in meters, class ids). Misses are +inf/sky."""
    flat = dirs.reshape(-1, 3)
    n = flat.shape[0]
    best_t = np.full(n, np.inf)
    best_cls = np.zeros(n, dtype=np.uint8)

    dz = flat[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        t_plane = (snap.ground_z_cm - origin[2]) / dz
    hit = np.isfinite(t_plane) & (t_plane > 1e-6)
    best_t[hit] = t_plane[hit]
    best_cls[hit] = 1  # ground

    inv = np.empty_like(flat)
    with np.errstate(divide="ignore"):
        np.divide(1.0, flat, out=inv)
    actors = [a for a in snap.actors if a.actor_id != exclude_actor]
    if actors:
        # Slab test over all boxes at once, accumulated one axis at a time to
        # keep every temporary at (boxes, rays). fmax/fmin skip NaNs (ray
        # parallel to a face it starts on) exactly like per-box nan-reductions,
        # and argmin's first-minimum rule keeps the earliest actor on exact
        # ties — both identical to a sequential per-actor scan.
        lo = np.stack([a.position - a.bbox for a in actors])
        hi = np.stack([a.position + a.bbox for a in actors])
        cls = np.array([a.class_id for a in actors], dtype=np.uint8)
        t_near = None
        t_far = None
        with np.errstate(invalid="ignore"):
            for axis in range(3):
                t1 = (lo[:, axis][:, None] - origin[axis]) * inv[None, :, axis]
                t2 = (hi[:, axis][:, None] - origin[axis]) * inv[None, :, axis]
                near = np.minimum(t1, t2)
                far = np.maximum(t1, t2)
                t_near = near if t_near is None else np.fmax(t_near, near)
                t_far = far if t_far is None else np.fmin(t_far, far)
        ok = (t_near <= t_far) & (t_far > 1e-6)
        t_hit = np.where(t_near > 1e-6, t_near, t_far)
        t_hit = np.where(ok, t_hit, np.inf)
        idx = np.argmin(t_hit, axis=0)
        t_actor = t_hit[idx, np.arange(n)]
        closer = t_actor < best_t
        best_t[closer] = t_actor[closer]
        best_cls[closer] = cls[idx[closer]]

    ranges_m = (best_t / 100.0).reshape(dirs.shape[:-1])
    return ranges_m, best_cls.reshape(dirs.shape[:-1])


def _parent(spec: SensorSpec, snap: Snapshot) -> ActorView:
    actor = snap.actor(spec.parent_id)
    if actor is None:
        raise ActorNotFound(f"sensor parent {spec.parent_id} not in snapshot")
    return actor


def camera_hits(spec: SensorSpec, snap: Snapshot) -> tuple[np.ndarray, np.ndarray]:
    """(ranges m, class ids) for one camera; shared by the image modalities."""
    pos, dirs = camera_rays(spec, _parent(spec, snap))
    return raycast(pos, dirs, snap, exclude_actor=spec.parent_id)


def render_depth(spec: SensorSpec, snap: Snapshot, hits=None) -> np.ndarray:
    ranges, _ = hits if hits is not None else camera_hits(spec, snap)
    return ranges.astype(np.float32)


def render_semantic(spec: SensorSpec, snap: Snapshot, hits=None) -> np.ndarray:
    _, classes = hits if hits is not None else camera_hits(spec, snap)
    return classes.astype(np.uint8)


def shade(ranges_m: np.ndarray) -> np.ndarray:
    out = np.zeros_like(ranges_m)
    finite = np.isfinite(ranges_m)
    out[finite] = 1.0 / (1.0 + ranges_m[finite] / SHADING_FALLOFF_M)
    return out


def render_rgb_proxy(spec: SensorSpec, snap: Snapshot, hits=None) -> np.ndarray:
    """Single-channel intensity: albedo(class) * illumination * shading(depth)."""
    ranges, classes = hits if hits is not None else camera_hits(spec, snap)
    value = ALBEDO[classes] * snap.weather.illumination * shade(ranges)
    return np.clip(np.rint(value * 255.0), 0, 255).astype(np.uint8)


def render_lidar(spec: SensorSpec, snap: Snapshot) -> np.ndarray:
    """Horizontal 720-ray fan of ranges (m) at the sensor's height."""
    parent = _parent(spec, snap)
    pos, _ = camera_pose(spec, parent)
    theta = 2.0 * math.pi * np.arange(LIDAR_RAYS) / LIDAR_RAYS
    dirs = np.stack([np.cos(theta), np.sin(theta), np.zeros(LIDAR_RAYS)], axis=1)
    ranges, _ = raycast(pos, dirs.reshape(1, LIDAR_RAYS, 3), snap, exclude_actor=spec.parent_id)
    return ranges.reshape(LIDAR_RAYS).astype(np.float32)


def _velocity_ned(actor: ActorView, snap: Snapshot) -> np.ndarray:
    drone = snap.drones.get(actor.actor_id)
    if drone is not None:
        return np.asarray(drone.velocity, dtype=float)
    return ue_to_ned_velocity(actor.velocity)


def sample_imu(spec: SensorSpec, snap: Snapshot) -> np.ndarray:
    """Specific force and angular rate in NED: [fx, fy, fz, wx, wy, wz].

    Acceleration is the finite difference of tick-boundary velocities; at
    hover the reading is (0, 0, -g).
    """
    actor = _parent(spec, snap)
    v_now = _velocity_ned(actor, snap)
    v_prev = snap.prev_velocity_ned.get(actor.actor_id, v_now)
    accel = (v_now - v_prev) / snap.dt_render
    specific_force = accel - np.array([0.0, 0.0, GRAVITY])
    omega = snap.angular_rate_ned.get(actor.actor_id, np.zeros(3))
    return np.concatenate([specific_force, omega]).astype(np.float64)


def sample_gnss(spec: SensorSpec, snap: Snapshot) -> np.ndarray:
    """Ideal NED fix plus the tick index: [north, east, down, tick].

    Drones report in their own NED frame (origin at spawn); ground actors
    report about the world origin.
    """
    actor = _parent(spec, snap)
    drone = snap.drones.get(actor.actor_id)
    if drone is not None:
        p = np.asarray(drone.position, dtype=float)
    else:
        p = ue_to_ned_position(actor.position, snap.world_origin_cm)
    return np.array([p[0], p[1], p[2], float(snap.tick)], dtype=np.float64)


_RENDERERS = {
    "depth": render_depth,
    "semantic": render_semantic,
    "rgb_proxy": render_rgb_proxy,
    "lidar_proxy": render_lidar,
    "imu": sample_imu,
    "gnss": sample_gnss,
}

_CAMERA_MODALITIES = ("depth", "semantic", "rgb_proxy")


def render(spec: SensorSpec, snap: Snapshot, cache: dict | None = None) -> np.ndarray:
    """One sensor reading; co-mounted cameras share a raycast via `cache`."""
    if cache is not None and spec.modality in _CAMERA_MODALITIES:
        key = (spec.parent_id, spec.mount_position, spec.mount_orientation,
               spec.width, spec.height)
        hits = cache.get(key)
        if hits is None:
            hits = cache[key] = camera_hits(spec, snap)
        return _RENDERERS[spec.modality](spec, snap, hits)
    return _RENDERERS[spec.modality](spec, snap)


def _shared_pose(actor: ActorView, snap: Snapshot) -> dict:
    drone = snap.drones.get(actor.actor_id)
    if drone is not None:
        origin_offset = ue_to_ned_position(drone.ned_origin_cm, snap.world_origin_cm)
        p = np.asarray(drone.position) + origin_offset
        q = np.asarray(drone.orientation)
    else:
        p = ue_to_ned_position(actor.position, snap.world_origin_cm)
        q = ue_to_ned_quat(actor.orientation)
    return {"position": [float(x) for x in p], "orientation": [float(x) for x in q]}


def capture_all(snap: Snapshot, sensors: dict[int, SensorSpec]) -> TickRecord:
    """Sample every attached sensor from one snapshot.

    Runs in deterministic sensor-id order; every stream carries the snapshot
    tick, so the cross-stream tick deviation is zero by construction.
    """
    streams: dict[int, StreamPayload] = {}
    ray_cache: dict = {}
    for sensor_id in sorted(sensors):
        spec = sensors[sensor_id]
        data = render(spec, snap, ray_cache)
        streams[sensor_id] = StreamPayload(sensor_id, spec.modality, snap.tick, data)

    vehicle_pose = None
    drone_pose = None
    for actor in sorted(snap.actors, key=lambda a: a.actor_id):
        if vehicle_pose is None and actor.kind == "vehicle":
            vehicle_pose = _shared_pose(actor, snap)
        if drone_pose is None and actor.kind == "drone":
            drone_pose = _shared_pose(actor, snap)
    return TickRecord(snap.tick, streams, vehicle_pose, drone_pose)


def project_point(spec: SensorSpec, parent: ActorView, point_cm) -> tuple[float, float] | None:
    """Pixel coordinates of a ground-frame point, or None if behind the camera."""
    pos, q = camera_pose(spec, parent)
    rot = quat_matrix(q)
    rel = np.asarray(point_cm, dtype=float) - pos
    f = float(rel @ rot[:, 0])
    if f <= 1e-9:
        return None
    tan_h = math.tan(HORIZONTAL_FOV_RAD / 2.0)
    tan_v = tan_h * spec.height / spec.width
    sx = float(rel @ rot[:, 1]) / f / tan_h
    sy = -float(rel @ rot[:, 2]) / f / tan_v
    u = (sx + 1.0) * spec.width / 2.0 - 0.5
    v = (sy + 1.0) * spec.height / 2.0 - 0.5
    return u, v
