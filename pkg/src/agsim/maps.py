"""Procedural maps. Positions are ground-frame centimeters.

The built-in ``flat_town`` is a flat 400 m x 400 m plane at z = 0 carrying a
rectangular road loop of waypoints and a handful of static box obstacles set
back from the road.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MapNotFound


@dataclass(frozen=True)
class Obstacle:
    center: tuple[float, float, float]
    half_extents: tuple[float, float, float]


@dataclass(frozen=True)
class MapDef:
    name: str
    extent_cm: float            # half-width of the square plane
    ground_z_cm: float
    route: np.ndarray           # (N, 2) closed waypoint loop, cm
    obstacles: tuple[Obstacle, ...] = field(default_factory=tuple)

    def route_point(self, index: int) -> np.ndarray:
        return self.route[index % len(self.route)]


def _rect_loop(half_x: float, half_y: float, spacing: float) -> np.ndarray:
    """Waypoints marching counterclockwise around a rectangle."""
    corners = [
        (-half_x, -half_y),
        (half_x, -half_y),
        (half_x, half_y),
        (-half_x, half_y),
    ]
    points = []
    for i, (x0, y0) in enumerate(corners):
        x1, y1 = corners[(i + 1) % 4]
        length = math.hypot(x1 - x0, y1 - y0)
        steps = max(1, int(length // spacing))
        for k in range(steps):
            t = k / steps
            points.append((x0 + (x1 - x0) * t, y0 + (y1 - y0) * t))
    return np.array(points, dtype=float)


def _flat_town() -> MapDef:
    route = _rect_loop(12000.0, 8000.0, 500.0)
    obstacles = (
        Obstacle((6000.0, 0.0, 400.0), (500.0, 500.0, 400.0)),
        Obstacle((-6000.0, 0.0, 400.0), (500.0, 500.0, 400.0)),
        Obstacle((0.0, 4000.0, 300.0), (400.0, 400.0, 300.0)),
        Obstacle((0.0, -4000.0, 300.0), (400.0, 400.0, 300.0)),
    )
    return MapDef("flat_town", 20000.0, 0.0, route, obstacles)


_BUILTIN = {"flat_town": _flat_town}


def load_map(name: str) -> MapDef:
    try:
        return _BUILTIN[name]()
    except KeyError:
        raise MapNotFound(f"unknown map {name!r}") from None


def route_heading(map_def: MapDef, index: int) -> float:
    """Yaw (radians) of the route segment leaving waypoint ``index``."""
    a = map_def.route_point(index)
    b = map_def.route_point(index + 1)
    return math.atan2(b[1] - a[1], b[0] - a[0])


def vehicle_spawn_slots(map_def: MapDef, count: int, z_cm: float) -> list[tuple[np.ndarray, float, int]]:
    """Evenly spaced (position, yaw, route_index) slots along the loop."""
    n = len(map_def.route)
    if count > n:
        raise ValueError(f"map supports at most {n} vehicle slots")
    slots = []
    for i in range(count):
        idx = (i * n) // count
        p = map_def.route_point(idx)
        slots.append((np.array([p[0], p[1], z_cm]), route_heading(map_def, idx), idx))
    return slots


def pedestrian_path(map_def: MapDef, i: int) -> np.ndarray:
    """Short back-and-forth sidewalk path offset outward from the loop."""
    n = len(map_def.route)
    idx = (i * 37) % n
    p = map_def.route_point(idx)
    away = p / max(1.0, float(np.hypot(p[0], p[1])))
    start = p + away * 600.0
    end = start + np.array([-away[1], away[0]]) * 800.0
    return np.array([start, end, start], dtype=float)
