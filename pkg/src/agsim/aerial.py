"""Aerial point-mass dynamics with per-axis PID velocity tracking.

The drone lives in its own NED frame (origin at its spawn point, meters,
Z down). Gravity is hover-compensated: the controller output is the net
acceleration, so a zero velocity command holds position exactly. Attitude is
not modeled; the state quaternion stays identity. Integration is semi-implicit
Euler at the physics step, run as an integer number of substeps per render
tick. The derivative term acts on the measured velocity, not the error, to
avoid a kick when the command changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CommandOutOfRange, ConfigError, ControlNotEnabled

DT_RATIO_TOL = 1e-9


@dataclass(frozen=True)
class PhysicsConfig:
    dt_phys: float = 0.001      # s
    gravity: float = 9.81       # m/s^2, hover-compensated
    kp: float = 2.0
    ki: float = 0.1
    kd: float = 0.05
    v_max: float = 10.0         # m/s command bound
    safety_factor: float = 1.5  # hard clamp at safety_factor * v_max


@dataclass
class DroneState:
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))   # NED m
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))   # NED m/s
    commanded_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    drag_coeff: float = 0.05    # 1/s
    api_control_enabled: bool = False
    integral: np.ndarray = field(default_factory=lambda: np.zeros(3))
    prev_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    saturated: bool = False
    takeoff_target_z: float | None = None   # NED z, None when idle


def substep_count(dt_render: float, dt_phys: float) -> int:
    """Number of physics substeps per render tick; must divide evenly."""
    if dt_render <= 0 or dt_phys <= 0:
        raise ConfigError(f"timesteps must be positive, got {dt_render}/{dt_phys}")
    ratio = dt_render / dt_phys
    n = round(ratio)
    if n < 1 or abs(ratio - n) > DT_RATIO_TOL * max(1.0, ratio):
        raise ConfigError(
            f"render step {dt_render} is not an integer multiple of physics step {dt_phys}"
        )
    return int(n)


def set_velocity_command(d: DroneState, v, cfg: PhysicsConfig) -> None:
    """Accept a velocity command; requires control, rejects out-of-range."""
    if not d.api_control_enabled:
        raise ControlNotEnabled("enable API control before commanding velocity")
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise CommandOutOfRange(f"velocity command must be a finite 3-vector")
    speed = float(np.linalg.norm(v))
    if speed > cfg.v_max:
        raise CommandOutOfRange(f"|v| = {speed:.3f} exceeds v_max = {cfg.v_max}")
    d.commanded_velocity = v.copy()


def physics_substep(d: DroneState, cfg: PhysicsConfig) -> None:
    """One semi-implicit Euler step of the PID-tracked point mass."""
    dt = cfg.dt_phys
    cmd = d.commanded_velocity
    if d.takeoff_target_z is not None:
        # Takeoff overrides the vertical channel until the altitude is met.
        dz = d.takeoff_target_z - d.position[2]
        if abs(dz) < 0.05:
            d.takeoff_target_z = None
        else:
            cmd = cmd.copy()
            cmd[2] = max(-cfg.v_max, min(cfg.v_max, dz))

    error = cmd - d.velocity
    d.integral = d.integral + error * dt
    deriv = -(d.velocity - d.prev_velocity) / dt
    d.prev_velocity = d.velocity.copy()

    # Gravity cancels against hover thrust; drag opposes motion.
    accel = cfg.kp * error + cfg.ki * d.integral + cfg.kd * deriv - d.drag_coeff * d.velocity

    d.velocity = d.velocity + accel * dt
    bound = cfg.safety_factor * cfg.v_max
    speed = float(np.linalg.norm(d.velocity))
    if speed > bound:
        d.velocity = d.velocity * (bound / speed)
        d.saturated = True
    d.position = d.position + d.velocity * dt


def integrate_over_tick(d: DroneState, cfg: PhysicsConfig, dt_render: float) -> int:
    """Run the full substep ladder for one render tick; returns the count."""
    n = substep_count(dt_render, cfg.dt_phys)
    for _ in range(n):
        physics_substep(d, cfg)
    return n
