"""Autonomous landing of a drone on a moving vehicle roof.

A single synchronous client drives both endpoints: the vehicle follows its
route on autopilot (ground API), the drone is velocity-controlled (aerial
API). Drone state lives in its own NED frame, the vehicle in world
coordinates, so the chase runs entirely in the shared frame obtained through
the spawn-point co-registration offset.

Phases:

* ``approach`` — hold altitude, close the horizontal gap.
* ``descent``  — follow a raised-cosine altitude reference from the start
  altitude down.
* ``touchdown`` — declared after a run of consecutive ticks near the roof
  with a small horizontal error.

The velocity command is vehicle-velocity feedforward plus a proportional
term on the shared-frame position error; the vertical channel adds the
reference descent rate as feedforward.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ..client import AerialClient, GroundClient
from ..frames import compute_origin_offset
from .common import aerial_command, clamp_speed, transform_position_ned, transform_velocity_ned


@dataclass(frozen=True)
class LandingConfig:
    start_altitude_m: float = 12.0
    descent_duration_s: float = 20.0
    gain: float = 1.0
    vehicle_feedforward: bool = True
    approach_threshold_m: float = 1.0
    touchdown_tolerance_m: float = 0.3
    touchdown_horizontal_m: float = 0.5
    touchdown_ticks: int = 5
    cruise_speed_cm_s: float = 500.0
    spawn_offset_m: float = 6.0        # initial horizontal gap to the vehicle
    v_max_m_s: float = 10.0
    max_ticks: int = 3000


@dataclass
class LandingReport:
    success: bool
    ticks: int
    final_horizontal_error_m: float
    final_altitude_m: float
    phase_ticks: dict
    time_s: list = field(default_factory=list)
    z_ref_m: list = field(default_factory=list)
    altitude_m: list = field(default_factory=list)
    horizontal_error_m: list = field(default_factory=list)
    phase: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "ticks": self.ticks,
            "final_horizontal_error_m": self.final_horizontal_error_m,
            "final_altitude_m": self.final_altitude_m,
            "phase_ticks": self.phase_ticks,
        }

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time_s", "phase", "z_ref_m", "altitude_m",
                             "horizontal_error_m"])
            for row in zip(self.time_s, self.phase, self.z_ref_m,
                           self.altitude_m, self.horizontal_error_m):
                writer.writerow(row)


def descent_reference(elapsed_s: float, config: LandingConfig) -> float:
    """Raised-cosine altitude reference, monotone from start altitude to 0."""
    tau = min(max(elapsed_s, 0.0), config.descent_duration_s)
    return config.start_altitude_m * (1.0 + math.cos(math.pi * tau / config.descent_duration_s)) / 2.0


def descent_rate(elapsed_s: float, config: LandingConfig) -> float:
    """Time derivative of the altitude reference (non-positive)."""
    if elapsed_s < 0.0 or elapsed_s > config.descent_duration_s:
        return 0.0
    return (-config.start_altitude_m * math.pi
            / (2.0 * config.descent_duration_s)
            * math.sin(math.pi * elapsed_s / config.descent_duration_s))


def roof_altitude_m(transform: dict) -> float:
    """Top of the vehicle in shared-frame altitude (position z + half height)."""
    z_center_cm = transform["pose"]["position"][2]
    half_height_cm = transform["bbox"][2]
    return (z_center_cm + half_height_cm) / 100.0


def landing_command(vehicle_ned, vehicle_vel_ned, drone_ned, z_ref: float,
                    z_rate: float, config: LandingConfig) -> np.ndarray:
    """One tick's velocity command from shared-frame states and the reference."""
    vehicle_ned = np.asarray(vehicle_ned, dtype=np.float64)
    vehicle_vel_ned = np.asarray(vehicle_vel_ned, dtype=np.float64)
    drone_ned = np.asarray(drone_ned, dtype=np.float64)
    command = np.zeros(3)
    if config.vehicle_feedforward:
        command[:2] = vehicle_vel_ned[:2]
    command[:2] += config.gain * (vehicle_ned[:2] - drone_ned[:2])
    # NED z is down: reference error and rate change sign.
    command[2] = -z_rate + config.gain * (-z_ref - drone_ned[2])
    return clamp_speed(command, config.v_max_m_s)


def run_landing(ground: GroundClient, aerial: AerialClient,
                config: LandingConfig = LandingConfig()) -> LandingReport:
    """Spawn the pair, fly the landing, and report the trajectory."""
    dt = ground.world_snapshot()["dt"]

    vehicle_id = ground.spawn_actor("vehicle", (0.0, 0.0, 75.0), heading=0.0)
    ground.set_autopilot(vehicle_id, True, speed=config.cruise_speed_cm_s)

    drone_spawn_ue = np.array([
        -config.spawn_offset_m * 100.0, 0.0, config.start_altitude_m * 100.0,
    ])
    drone_id = ground.spawn_actor("drone", drone_spawn_ue.tolist())
    # The drone's NED frame is anchored at its spawn point: co-register once.
    offset = compute_origin_offset(drone_spawn_ue, np.zeros(3))

    ground.set_sync_mode(True)
    report = LandingReport(success=False, ticks=0, final_horizontal_error_m=math.inf,
                           final_altitude_m=config.start_altitude_m,
                           phase_ticks={"approach": 0, "descent": 0, "touchdown": 0})
    try:
        aerial_command(ground, aerial, "enable_api_control",
                       {"actor_id": drone_id, "enabled": True})

        phase = "approach"
        descent_start_s = 0.0
        touchdown_run = 0
        horiz_err = math.inf
        altitude = config.start_altitude_m

        for _ in range(config.max_ticks):
            state = aerial.multirotor_state(drone_id)
            transform = ground.actor_transform(vehicle_id)

            drone_ned = np.asarray(state["position"], dtype=np.float64) + offset.d
            vehicle_ned = transform_position_ned(transform)
            vehicle_vel = transform_velocity_ned(transform)
            roof_alt = roof_altitude_m(transform)
            altitude = -drone_ned[2]
            horiz = vehicle_ned[:2] - drone_ned[:2]
            horiz_err = float(np.linalg.norm(horiz))

            now = report.ticks * dt
            if phase == "approach" and horiz_err < config.approach_threshold_m:
                phase = "descent"
                descent_start_s = now
            if phase == "approach":
                z_ref = config.start_altitude_m
                z_rate = 0.0
            else:
                z_ref = descent_reference(now - descent_start_s, config)
                z_rate = descent_rate(now - descent_start_s, config)

            command = landing_command(vehicle_ned, vehicle_vel, drone_ned,
                                      z_ref, z_rate, config)

            aerial_command(ground, aerial, "set_velocity",
                           {"actor_id": drone_id,
                            "velocity": [float(x) for x in command]})

            report.ticks += 1
            report.phase_ticks[phase] += 1
            report.time_s.append(report.ticks * dt)
            report.z_ref_m.append(z_ref)
            report.altitude_m.append(altitude)
            report.horizontal_error_m.append(horiz_err)
            report.phase.append(phase)

            if phase == "descent":
                near_roof = abs(altitude - roof_alt) <= config.touchdown_tolerance_m
                close = horiz_err < config.touchdown_horizontal_m
                touchdown_run = touchdown_run + 1 if (near_roof and close) else 0
                if touchdown_run >= config.touchdown_ticks:
                    report.phase_ticks["touchdown"] = touchdown_run
                    report.success = True
                    break

        report.final_horizontal_error_m = horiz_err
        report.final_altitude_m = altitude
    finally:
        ground.set_sync_mode(False)
        try:
            aerial.set_velocity((0.0, 0.0, 0.0), drone_id)
        except Exception:
            pass  # teardown only; the drone is destroyed next anyway
        ground.destroy_actor(drone_id)
        ground.destroy_actor(vehicle_id)
    return report
