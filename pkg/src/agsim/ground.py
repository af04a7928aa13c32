"""Ground agents: kinematic bicycle vehicles and scripted pedestrians.

Sign conventions: steering is left-positive, and heading is measured
left-positive from +X, so forward = (cos h, -sin h) in engine coordinates
(X forward, Y right). With that choice the bicycle relation
``heading += (speed / wheelbase) * tan(steering) * dt`` turns the vehicle
toward the steering side. Speed is kinematic: the autopilot command sets it
directly each tick, there is no longitudinal acceleration model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import RouteExhausted
from .frames import PoseUE, yaw_quat_ue

MAX_STEERING = 0.6          # rad
WAYPOINT_POP_CM = 200.0
PEDESTRIAN_POP_CM = 50.0
MAX_PEDESTRIAN_SPEED = 250.0  # cm/s
DEFAULT_CRUISE_CM_S = 500.0
DEFAULT_WHEELBASE_CM = 270.0
VEHICLE_BBOX_CM = (240.0, 110.0, 75.0)
PEDESTRIAN_BBOX_CM = (40.0, 40.0, 90.0)


def heading_forward(heading: float) -> np.ndarray:
    return np.array([math.cos(heading), -math.sin(heading)])


def heading_left(heading: float) -> np.ndarray:
    return np.array([-math.sin(heading), -math.cos(heading)])


@dataclass
class VehicleState:
    position: np.ndarray        # cm, z fixed by the flat map
    heading: float              # rad, left-positive from +X
    speed: float = 0.0          # cm/s
    steering: float = 0.0       # rad, left-positive
    wheelbase: float = DEFAULT_WHEELBASE_CM
    max_speed: float = 1500.0   # cm/s
    route: np.ndarray | None = None          # (N, 2) cm loop
    route_index: int = 0
    autopilot: bool = False
    cruise_speed: float = DEFAULT_CRUISE_CM_S

    @property
    def pose(self) -> PoseUE:
        # Left-positive heading maps to the engine yaw with a sign flip.
        return PoseUE(self.position.copy(), yaw_quat_ue(-self.heading))

    @property
    def velocity_cm_s(self) -> np.ndarray:
        f = heading_forward(self.heading)
        return np.array([f[0] * self.speed, f[1] * self.speed, 0.0])


def step_vehicle(v: VehicleState, steering: float, speed: float, dt: float) -> None:
    """Advance one tick of the kinematic bicycle. Clamps are always applied."""
    v.steering = max(-MAX_STEERING, min(MAX_STEERING, float(steering)))
    v.speed = max(0.0, min(v.max_speed, float(speed)))
    v.heading += (v.speed / v.wheelbase) * math.tan(v.steering) * dt
    f = heading_forward(v.heading)
    v.position = v.position + np.array([f[0], f[1], 0.0]) * (v.speed * dt)


def lookahead_distance(speed: float) -> float:
    return max(400.0, 0.5 * speed * 1.0)


def autopilot_step(v: VehicleState) -> tuple[float, float]:
    """Pure-pursuit steering and cruise speed toward the lookahead waypoint.

    Pops the current waypoint when within 200 cm; the route wraps. Raises
    RouteExhausted only when the vehicle has no route at all.
    """
    if v.route is None or len(v.route) == 0:
        raise RouteExhausted("autopilot requires a route")
    n = len(v.route)
    pos = v.position[:2]

    while True:
        wp = v.route[v.route_index % n]
        if math.hypot(wp[0] - pos[0], wp[1] - pos[1]) < WAYPOINT_POP_CM:
            v.route_index = (v.route_index + 1) % n
        else:
            break

    lookahead = lookahead_distance(v.speed)
    idx = v.route_index
    target = v.route[idx % n]
    for k in range(n):
        candidate = v.route[(idx + k) % n]
        if math.hypot(candidate[0] - pos[0], candidate[1] - pos[1]) >= lookahead:
            target = candidate
            break

    delta = target - pos
    dist = math.hypot(delta[0], delta[1])
    if dist < 1e-9:
        return 0.0, min(v.max_speed, v.cruise_speed)
    fwd = float(delta @ heading_forward(v.heading))
    left = float(delta @ heading_left(v.heading))
    alpha = math.atan2(left, fwd)
    steering = math.atan2(2.0 * v.wheelbase * math.sin(alpha), dist)
    steering = max(-MAX_STEERING, min(MAX_STEERING, steering))
    return steering, min(v.max_speed, v.cruise_speed)


@dataclass
class PedestrianState:
    position: np.ndarray        # cm
    speed: float = 140.0        # cm/s, clamped to the walking bound
    path: np.ndarray | None = None           # (K, 2) cm
    path_index: int = 0
    heading: float = 0.0

    def __post_init__(self):
        self.speed = max(0.0, min(MAX_PEDESTRIAN_SPEED, self.speed))

    @property
    def pose(self) -> PoseUE:
        return PoseUE(self.position.copy(), yaw_quat_ue(-self.heading))

    @property
    def velocity_cm_s(self) -> np.ndarray:
        if self.path is None or len(self.path) == 0 or self._parked():
            return np.zeros(3)
        f = heading_forward(self.heading)
        return np.array([f[0] * self.speed, f[1] * self.speed, 0.0])

    def _parked(self) -> bool:
        end = self.path[len(self.path) - 1]
        return (self.path_index >= len(self.path) - 1
                and math.hypot(end[0] - self.position[0],
                               end[1] - self.position[1]) < 1e-9)


def step_pedestrian(p: PedestrianState, dt: float) -> None:
    """Straight-line walk along the path at fixed speed.

    Intermediate points pop within 50 cm; the final point is walked to
    exactly and the path does not wrap — the pedestrian parks there.
    """
    if p.path is None or len(p.path) == 0:
        return
    n = len(p.path)
    while p.path_index < n - 1:
        wp = p.path[p.path_index]
        if math.hypot(wp[0] - p.position[0], wp[1] - p.position[1]) < PEDESTRIAN_POP_CM:
            p.path_index += 1
        else:
            break
    target = p.path[min(p.path_index, n - 1)]
    delta = target - p.position[:2]
    dist = math.hypot(delta[0], delta[1])
    if dist < 1e-9:
        return
    step = min(dist, p.speed * dt)
    direction = delta / dist
    p.heading = math.atan2(-direction[1], direction[0])
    p.position = p.position + np.array([direction[0], direction[1], 0.0]) * step
