"""Shared plumbing for the reference workflows.

Every workflow is a single-threaded client of the two RPC endpoints and keeps
the state split strict: ground-actor state comes only from the ground API,
drone state only from the aerial API. In synchronous mode a queued command is
pipelined: fire it, barrier the same connection with a ping so it is known to
be queued, advance one tick through the ground API, then collect the ack.
"""

from __future__ import annotations

import numpy as np

from ..client import AerialClient, GroundClient


def aerial_command(ground: GroundClient, aerial: AerialClient,
                   method: str, params: dict) -> dict:
    """Apply one aerial command under synchronous mode; advances one tick."""
    req_id = aerial.send(method, params)
    aerial.ping()  # barrier: the command is in the tick queue once this returns
    ground.tick()
    return aerial.recv(req_id)


def transform_position_ned(transform: dict, origin_cm=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Shared-frame position (m) of a ground-API transform payload."""
    p = transform["pose"]["position"]
    o = origin_cm
    return np.array([
        (p[0] - o[0]) / 100.0,
        (p[1] - o[1]) / 100.0,
        -(p[2] - o[2]) / 100.0,
    ])


def transform_velocity_ned(transform: dict) -> np.ndarray:
    v = transform["velocity"]
    return np.array([v[0] / 100.0, v[1] / 100.0, -v[2] / 100.0])


def clamp_speed(v: np.ndarray, v_max: float) -> np.ndarray:
    speed = float(np.linalg.norm(v))
    if speed > v_max:
        # Shade the factor so rounding can't push the norm back above the
        # limit, which the kernel rejects outright.
        return v * ((v_max / speed) * (1.0 - 1e-12))
    return v
