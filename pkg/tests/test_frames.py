"""Frame-transform oracles: worked examples frozen by hand, then properties.

The worked examples were computed independently by hand before the module
existed; they must hold bit-for-bit because every operation is plain float
arithmetic with exactly-representable operands.
"""

import math
import random

import numpy as np
import pytest

from agsim.errors import InvalidInput
from agsim.frames import (
    IDENTITY_QUAT,
    OriginOffset,
    PoseNED,
    PoseUE,
    co_register,
    compute_origin_offset,
    ned_to_ue_position,
    ned_to_ue_quat,
    ned_to_ue_velocity,
    quat_matrix,
    rotate_ned,
    rotate_ue,
    ue_to_ned_position,
    ue_to_ned_quat,
    ue_to_ned_velocity,
    yaw_quat_ue,
)

SQ2 = math.sqrt(2.0) / 2.0


# ----------------------------------------------------------- worked examples


def test_position_worked_example_bit_exact():
    out = ue_to_ned_position((250.0, -200.0, 500.0))
    assert out.tolist() == [2.5, -2.0, -5.0]


def test_position_inverse_worked_example_bit_exact():
    out = ned_to_ue_position((1.0, 2.0, 3.0))
    assert out.tolist() == [100.0, 200.0, -300.0]


def test_origin_shift_applies_before_scaling():
    out = ue_to_ned_position((350.0, -100.0, 600.0), origin_cm=(100.0, 100.0, 100.0))
    assert out.tolist() == [2.5, -2.0, -5.0]


def test_origin_maps_to_origin():
    assert ue_to_ned_position((0.0, 0.0, 0.0)).tolist() == [0.0, 0.0, 0.0]
    o = (12.0, -7.0, 3.0)
    assert ue_to_ned_position(o, o).tolist() == [0.0, 0.0, 0.0]


def test_scale_check_100cm_is_1m():
    assert ue_to_ned_position((100.0, 0.0, 0.0)).tolist() == [1.0, 0.0, 0.0]


def test_quat_worked_example_bit_exact():
    out = ue_to_ned_quat((SQ2, 0.0, 0.0, SQ2))
    assert out.tolist() == [SQ2, 0.0, 0.0, -SQ2]


def test_quat_identity_fixed_point():
    assert ue_to_ned_quat((1.0, 0.0, 0.0, 0.0)).tolist() == [1.0, 0.0, 0.0, 0.0]


def test_quat_involution():
    rng = random.Random(11)
    for _ in range(200):
        q = np.array([rng.gauss(0, 1) for _ in range(4)])
        q /= np.linalg.norm(q)
        assert ue_to_ned_quat(ue_to_ned_quat(q)).tolist() == q.tolist()


def test_quat_norm_preserved_exactly():
    rng = random.Random(5)
    for _ in range(200):
        q = np.array([rng.gauss(0, 1) for _ in range(4)])
        q /= np.linalg.norm(q)
        out = ue_to_ned_quat(q)
        # Sign flip only: identical magnitude bits per component.
        assert np.abs(out).tolist() == np.abs(q).tolist()


def test_offset_worked_example_bit_exact():
    off = compute_origin_offset((300.0, 400.0, 100.0), (1.0, 1.0, -1.0))
    assert off.d.tolist() == [2.0, 3.0, 0.0]


def test_offset_zero_at_world_origin():
    off = compute_origin_offset((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    assert off.d.tolist() == [0.0, 0.0, 0.0]


def test_co_register_worked_example():
    assert co_register((10.0, 5.0), (2.0, 3.0)).tolist() == [12.0, 8.0]


def test_co_register_identity_with_zero_offset():
    p = np.array([4.0, -2.0, 1.5])
    assert co_register(p, OriginOffset(np.zeros(3))).tolist() == p.tolist()


# ----------------------------------------------------------------- handedness


def test_yaw_oracle_ue_forward_to_right():
    q = yaw_quat_ue(math.pi / 2.0)
    out = rotate_ue(q, (1.0, 0.0, 0.0))
    assert np.allclose(out, [0.0, 1.0, 0.0], atol=1e-12)


def test_yaw_oracle_ned_north_to_east():
    q_ned = ue_to_ned_quat(yaw_quat_ue(math.pi / 2.0))
    out = rotate_ned(q_ned, (1.0, 0.0, 0.0))
    assert np.allclose(out, [0.0, 1.0, 0.0], atol=1e-12)


def test_quat_matrix_is_special_orthogonal():
    rng = random.Random(3)
    for _ in range(100):
        q = np.array([rng.gauss(0, 1) for _ in range(4)])
        q /= np.linalg.norm(q)
        m = quat_matrix(q)
        assert np.allclose(m @ m.T, np.eye(3), atol=1e-12)
        assert np.linalg.det(m) == pytest.approx(1.0, abs=1e-12)


# ------------------------------------------------------------------ round trip


def test_round_trip_10k_random_poses():
    rng = random.Random(42)
    worst = 0.0
    for _ in range(10_000):
        p = np.array([rng.uniform(-1e6, 1e6) for _ in range(3)])
        o = np.array([rng.uniform(-1e4, 1e4) for _ in range(3)])
        back = ned_to_ue_position(ue_to_ned_position(p, o), o)
        worst = max(worst, float(np.max(np.abs(back - p))))
    # 1e-9 m position tolerance expressed in cm.
    assert worst < 1e-9 * 100.0


def test_velocity_round_trip():
    rng = random.Random(7)
    for _ in range(1000):
        v = np.array([rng.uniform(-1e4, 1e4) for _ in range(3)])
        back = ned_to_ue_velocity(ue_to_ned_velocity(v))
        assert np.allclose(back, v, atol=1e-9)


def test_co_registration_cross_check_oracle():
    # A moved agent's co-registered aerial position must equal the direct
    # world-frame conversion of the same physical point.
    rng = random.Random(21)
    for _ in range(500):
        spawn_ue = np.array([rng.uniform(-1e4, 1e4) for _ in range(3)])
        offset = compute_origin_offset(spawn_ue, np.zeros(3))
        move_ue = np.array([rng.uniform(-1e4, 1e4) for _ in range(3)])
        world_point = spawn_ue + move_ue
        # The drone's own frame sees displacement only.
        p_ned_local = ue_to_ned_position(world_point, spawn_ue)
        shared = co_register(p_ned_local, offset)
        direct = ue_to_ned_position(world_point)
        assert np.allclose(shared, direct, atol=1e-9)


# -------------------------------------------------------------------- errors


def test_non_finite_position_rejected():
    with pytest.raises(InvalidInput):
        ue_to_ned_position((math.nan, 0.0, 0.0))
    with pytest.raises(InvalidInput):
        ned_to_ue_position((math.inf, 0.0, 0.0))


def test_non_unit_quat_rejected():
    with pytest.raises(InvalidInput):
        ue_to_ned_quat((1.0, 1.0, 0.0, 0.0))
    with pytest.raises(InvalidInput):
        ned_to_ue_quat((0.5, 0.0, 0.0, 0.0))


def test_pose_types_validate():
    with pytest.raises(InvalidInput):
        PoseUE(np.zeros(3), np.array([0.9, 0.0, 0.0, 0.0]))
    with pytest.raises(InvalidInput):
        PoseNED(np.array([1.0, np.nan, 0.0]), IDENTITY_QUAT)
    pose = PoseUE(np.zeros(3), IDENTITY_QUAT)
    assert pose.orientation.tolist() == [1.0, 0.0, 0.0, 0.0]


def test_co_register_shape_mismatch_rejected():
    with pytest.raises(InvalidInput):
        co_register((1.0, 2.0), (1.0, 2.0, 3.0))
