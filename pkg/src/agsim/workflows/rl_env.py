"""Reinforcement-learning episode driver for the drone-chase task.

The agent commands drone velocity in NED while a target vehicle drives the
map loop. Everything runs over the two RPC endpoints from a single thread;
each `step` advances the world exactly one synchronous tick, so seeded
episodes replay exactly.

Observation (17 floats):

====== ===============================================
0..2   drone position, shared NED frame (m)
3..5   drone velocity, NED (m/s)
6..8   drone commanded velocity, NED (m/s)
9..11  vehicle position minus drone position, NED (m)
12..14 vehicle velocity, NED (m/s)
15     altitude error: target minus current (m)
16     saturation flag (0 or 1)
====== ===============================================

Reward per step: ``-lateral_distance - 0.5*|altitude error| - 10*collision``.
An episode ends on collision or after `max_steps`; stepping a finished
episode raises `EpisodeDone`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from ..client import AerialClient, GroundClient
from ..errors import CommandOutOfRange, EpisodeDone, ResetError, SimError
from ..frames import compute_origin_offset
from ..maps import load_map, route_heading
from ..snapshot import aabb_overlap
from .common import transform_position_ned, transform_velocity_ned

OBS_DIM = 17


@dataclass(frozen=True)
class RlEnvConfig:
    max_steps: int = 200
    target_altitude_m: float = 10.0
    altitude_weight: float = 0.5
    collision_penalty: float = 10.0
    cruise_speed_cm_s: float = 500.0
    v_max_m_s: float = 10.0
    map_name: str = "flat_town"
    spawn_jitter_cm: float = 300.0      # seeded lateral offset of the drone spawn


class RlEnv:
    """Episodic wrapper over one ground and one aerial connection."""

    def __init__(self, ground: GroundClient, aerial: AerialClient,
                 config: RlEnvConfig = RlEnvConfig()):
        self.ground = ground
        self.aerial = aerial
        self.config = config
        self.map = load_map(config.map_name)
        self.vehicle_id: int | None = None
        self.drone_id: int | None = None
        self._offset_d = np.zeros(3)
        self._steps = 0
        self._done = True

    # ------------------------------------------------------------- lifecycle

    def reset(self, seed: int = 0) -> np.ndarray:
        """Fresh seeded episode; returns the first observation."""
        self.ground.set_sync_mode(True)
        rng = random.Random(seed)
        idx = rng.randrange(len(self.map.route))
        vpos = self.map.route_point(idx)
        yaw = route_heading(self.map, idx)
        jitter = self.config.spawn_jitter_cm
        drone_xy = vpos + np.array([rng.uniform(-jitter, jitter),
                                    rng.uniform(-jitter, jitter)])
        drone_pos = [float(drone_xy[0]), float(drone_xy[1]),
                     self.config.target_altitude_m * 100.0]

        pending = [self.ground.send("destroy_actor", {"actor_id": aid})
                   for aid in (self.drone_id, self.vehicle_id) if aid is not None]
        spawn_v = self.ground.send("spawn_actor", {
            "kind": "vehicle",
            "position": [float(vpos[0]), float(vpos[1]), 75.0],
            "heading": -yaw,
            "params": {"autopilot": True, "route_index": idx,
                       "cruise_speed": self.config.cruise_speed_cm_s},
        })
        spawn_d = self.ground.send("spawn_actor", {"kind": "drone",
                                                   "position": drone_pos})
        self.ground.tick()
        try:
            for req in pending:
                self.ground.recv(req)
            self.vehicle_id = self.ground.recv(spawn_v)["actor_id"]
            self.drone_id = self.ground.recv(spawn_d)["actor_id"]
        except SimError as exc:
            raise ResetError(f"episode setup failed: {exc}") from exc
        self._offset_d = compute_origin_offset(np.asarray(drone_pos),
                                               np.zeros(3)).d

        enable = self.aerial.send("enable_api_control",
                                  {"actor_id": self.drone_id, "enabled": True})
        self.aerial.ping()
        self.ground.tick()
        self.aerial.recv(enable)

        self._steps = 0
        self._done = False
        return self._observe()[0]

    def step(self, action) -> tuple[np.ndarray, float, bool, dict]:
        if self._done:
            raise EpisodeDone("call reset() before stepping again")
        v = np.asarray(action, dtype=np.float64).reshape(-1)
        if v.shape != (3,) or not np.all(np.isfinite(v)):
            raise CommandOutOfRange("action must be a finite 3-vector (m/s)")
        if float(np.linalg.norm(v)) > self.config.v_max_m_s + 1e-12:
            raise CommandOutOfRange(
                f"|action| exceeds {self.config.v_max_m_s} m/s")

        req = self.aerial.send("set_velocity", {"actor_id": self.drone_id,
                                                "velocity": v.tolist()})
        self.aerial.ping()
        self.ground.tick()
        self.aerial.recv(req)

        obs, lateral, altitude = self._observe()
        collision = self._collided()
        reward = (-lateral
                  - self.config.altitude_weight
                  * abs(self.config.target_altitude_m - altitude)
                  - self.config.collision_penalty * collision)
        self._steps += 1
        self._done = collision or self._steps >= self.config.max_steps
        info = {"steps": self._steps, "lateral_m": lateral,
                "altitude_m": altitude, "collision": collision}
        return obs, float(reward), self._done, info

    def close(self) -> None:
        try:
            self.ground.set_sync_mode(False)
            for aid in (self.drone_id, self.vehicle_id):
                if aid is not None:
                    self.ground.destroy_actor(aid)
        finally:
            self.vehicle_id = None
            self.drone_id = None
            self._done = True

    # ------------------------------------------------------------- internals

    def _observe(self) -> tuple[np.ndarray, float, float]:
        state = self.aerial.multirotor_state(self.drone_id)
        transform = self.ground.actor_transform(self.vehicle_id)

        drone_pos = np.asarray(state["position"]) + self._offset_d
        drone_vel = np.asarray(state["velocity"])
        commanded = np.asarray(state["commanded_velocity"])
        vehicle_pos = transform_position_ned(transform)
        vehicle_vel = transform_velocity_ned(transform)

        rel = vehicle_pos - drone_pos
        lateral = float(np.hypot(rel[0], rel[1]))
        altitude = float(-drone_pos[2])
        obs = np.concatenate([
            drone_pos, drone_vel, commanded, rel, vehicle_vel,
            [self.config.target_altitude_m - altitude],
            [1.0 if state["saturated"] else 0.0],
        ])
        return obs, lateral, altitude

    def _collided(self) -> bool:
        snap = self.ground.world_snapshot()
        drone = None
        others = []
        for actor in snap["actors"]:
            if actor["id"] == self.drone_id:
                drone = actor
            else:
                others.append(actor)
        if drone is None:
            return False
        dp = np.asarray(drone["pose"]["position"])
        dh = np.asarray(drone["bbox"])
        return any(
            aabb_overlap(dp, dh, np.asarray(a["pose"]["position"]), np.asarray(a["bbox"]))
            for a in others
        )
