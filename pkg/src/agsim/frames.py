"""Transforms between the ground engine frame and the aerial NED frame.

The ground frame is left-handed with X forward, Y right, Z up, measured in
centimeters. The aerial frame is right-handed NED (X north, Y east, Z down),
measured in meters. The forward/north and right/east axes of the two frames
are aligned, so positions convert with an origin shift, a scale, and a Z sign
flip only - no axis permutation. Orientations are scalar-first quaternions
(w, x, y, z) and convert by negating the z component, which is an involution.

Application conventions (documented because the two ecosystems disagree):
ground-frame quaternions rotate vectors with the standard Hamilton sandwich,
so a yaw with positive qz turns forward toward +Y (the right/east side);
NED quaternions are applied with the conjugate (frame) convention, which is
the aeronautics world-to-body reading. Under these conventions the component
mapping above is self-consistent: the same physical right turn maps forward
to right in the ground frame and north to east in NED.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput

CM_PER_M = 100.0
UNIT_NORM_TOL = 1e-9


def _vec3(v, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise InvalidInput(f"{name} must be a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} must be finite, got {a.tolist()}")
    return a


def _quat(q, name: str) -> np.ndarray:
    a = np.asarray(q, dtype=float)
    if a.shape != (4,):
        raise InvalidInput(f"{name} must be a scalar-first quaternion, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} must be finite")
    norm = float(np.sqrt(np.dot(a, a)))
    if abs(norm - 1.0) > UNIT_NORM_TOL:
        raise InvalidInput(f"{name} must be unit norm, |q| = {norm!r}")
    return a


@dataclass(frozen=True)
class PoseUE:
    """Pose in the ground engine frame: position in cm, unit quaternion."""

    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position, "position"))
        object.__setattr__(self, "orientation", _quat(self.orientation, "orientation"))


@dataclass(frozen=True)
class PoseNED:
    """Pose in the aerial NED frame: position in m, unit quaternion."""

    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position, "position"))
        object.__setattr__(self, "orientation", _quat(self.orientation, "orientation"))


IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])


def ue_to_ned_position(p_cm, origin_cm=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Map a ground-frame position (cm) into NED meters about ``origin_cm``."""
    p = _vec3(p_cm, "p_cm")
    o = _vec3(origin_cm, "origin_cm")
    return np.array([
        (p[0] - o[0]) / CM_PER_M,
        (p[1] - o[1]) / CM_PER_M,
        -(p[2] - o[2]) / CM_PER_M,
    ])


def ned_to_ue_position(p_m, origin_cm=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Inverse of :func:`ue_to_ned_position`."""
    p = _vec3(p_m, "p_m")
    o = _vec3(origin_cm, "origin_cm")
    return np.array([
        p[0] * CM_PER_M + o[0],
        p[1] * CM_PER_M + o[1],
        -p[2] * CM_PER_M + o[2],
    ])


def ue_to_ned_quat(q) -> np.ndarray:
    """Negate the quaternion z component. Applying it twice is the identity."""
    a = _quat(q, "q")
    return np.array([a[0], a[1], a[2], -a[3]])


# The component mapping is its own inverse.
ned_to_ue_quat = ue_to_ned_quat


def ue_to_ned_velocity(v_cm_s) -> np.ndarray:
    """Velocities scale and z-flip like positions but ignore the origin."""
    v = _vec3(v_cm_s, "v_cm_s")
    return np.array([v[0] / CM_PER_M, v[1] / CM_PER_M, -v[2] / CM_PER_M])


def ned_to_ue_velocity(v_m_s) -> np.ndarray:
    v = _vec3(v_m_s, "v_m_s")
    return np.array([v[0] * CM_PER_M, v[1] * CM_PER_M, -v[2] * CM_PER_M])


def ue_to_ned_pose(pose: PoseUE, origin_cm=(0.0, 0.0, 0.0)) -> PoseNED:
    return PoseNED(
        ue_to_ned_position(pose.position, origin_cm),
        ue_to_ned_quat(pose.orientation),
    )


def ned_to_ue_pose(pose: PoseNED, origin_cm=(0.0, 0.0, 0.0)) -> PoseUE:
    return PoseUE(
        ned_to_ue_position(pose.position, origin_cm),
        ned_to_ue_quat(pose.orientation),
    )


@dataclass(frozen=True)
class OriginOffset:
    """Rigid shift (m, NED) aligning the aerial frame with the shared frame."""

    d: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d", _vec3(self.d, "d"))


def compute_origin_offset(spawn_world, spawn_ned, origin_cm=(0.0, 0.0, 0.0)) -> OriginOffset:
    """Offset between the converted world spawn pose and the aerial spawn pose.

    A drone spawned at the world origin yields a zero offset. Accepts poses or
    bare position vectors.
    """
    p_world = spawn_world.position if isinstance(spawn_world, PoseUE) else spawn_world
    p_ned = spawn_ned.position if isinstance(spawn_ned, PoseNED) else spawn_ned
    d = ue_to_ned_position(p_world, origin_cm) - _vec3(p_ned, "spawn_ned")
    return OriginOffset(d)


def co_register(p_ned, offset) -> np.ndarray:
    """Shift an aerial-frame point into the shared frame: p + d.

    Works for 2-vectors (horizontal tracking) and 3-vectors alike.
    """
    d = offset.d if isinstance(offset, OriginOffset) else np.asarray(offset, dtype=float)
    p = np.asarray(p_ned, dtype=float)
    if p.shape != d.shape or p.shape not in ((2,), (3,)):
        raise InvalidInput(f"shape mismatch: point {p.shape} vs offset {d.shape}")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(d))):
        raise InvalidInput("co_register requires finite inputs")
    return p + d


def quat_matrix(q) -> np.ndarray:
    """Rotation matrix of a unit quaternion under the Hamilton convention."""
    w, x, y, z = _quat(q, "q")
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def rotate_ue(q, v) -> np.ndarray:
    """Rotate a ground-frame vector by a ground-frame quaternion."""
    return quat_matrix(q) @ _vec3(v, "v")


def rotate_ned(q, v) -> np.ndarray:
    """Rotate a NED vector by a NED quaternion (frame convention)."""
    return quat_matrix(q).T @ _vec3(v, "v")


def quat_multiply(a, b) -> np.ndarray:
    """Hamilton product a*b, used to compose mount orientations."""
    aw, ax, ay, az = _quat(a, "a")
    bw, bx, by, bz = _quat(b, "b")
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def yaw_quat_ue(yaw: float) -> np.ndarray:
    """Ground-frame quaternion for a yaw (radians) about the up axis.

    Positive yaw turns forward toward +Y under :func:`rotate_ue`.
    """
    return np.array([np.cos(yaw / 2.0), 0.0, 0.0, np.sin(yaw / 2.0)])
