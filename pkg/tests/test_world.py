"""World tick loop: command ordering, id discipline, determinism, snapshots.

Determinism is checked by digesting `serialize_state` as canonical JSON and
comparing whole runs; actor-id rules are checked against the retired set.
"""

import json

import numpy as np
import pytest

from agsim.errors import (
    ActorNotFound,
    ControlNotEnabled,
    InvalidInput,
    MapNotFound,
    SpawnCollision,
    WeatherNotFound,
)
from agsim.frames import ue_to_ned_position
from agsim.world import AERIAL_PRIORITY, GROUND_PRIORITY, Command, World


def _world(**kw):
    kw.setdefault("spawn_map_obstacles", False)
    return World(**kw)


def _digest(world):
    return json.dumps(world.serialize_state(), sort_keys=True)


# --- time -------------------------------------------------------------------


def test_sim_time_is_tick_times_dt():
    w = _world()
    assert (w.tick, w.sim_time) == (0, 0.0)
    w.advance()
    assert (w.tick, w.sim_time) == (1, 0.05)
    for _ in range(9):
        w.advance()
    assert w.sim_time == 10 * 0.05     # product, not accumulated sum
    assert w.sim_time == w.tick * w.dt_render


def test_no_advance_means_frozen_state():
    w = _world()
    w.spawn_actor("vehicle", (0.0, 0.0, 75.0), speed=500.0)
    before = _digest(w)
    payload = w.world_snapshot_payload()
    for _ in range(3):
        assert w.world_snapshot_payload() == payload
    assert _digest(w) == before


# --- ids and spawn/destroy ---------------------------------------------------


def test_actor_ids_monotone_and_never_reused():
    w = _world()
    ids = [w.spawn_actor("static", (i * 1000.0, 0.0, 100.0)) for i in range(5)]
    assert ids == sorted(ids) and len(set(ids)) == 5
    w.destroy_actor(ids[2])
    w.destroy_actor(ids[0])
    later = w.spawn_actor("static", (9000.0, 0.0, 100.0))
    assert later > max(ids)
    assert {ids[0], ids[2]} <= w.retired_ids
    assert later not in w.retired_ids


def test_spawn_collision():
    w = _world()
    w.spawn_actor("vehicle", (0.0, 0.0, 75.0))
    with pytest.raises(SpawnCollision):
        w.spawn_actor("vehicle", (100.0, 50.0, 75.0))
    # Outside the summed half extents it succeeds.
    w.spawn_actor("vehicle", (1000.0, 0.0, 75.0))


def test_destroy_then_query_raises():
    w = _world()
    vid = w.spawn_actor("vehicle", (0.0, 0.0, 75.0))
    w.advance()
    assert w.actor_transform_payload(vid)["id"] == vid
    w.destroy_actor(vid)
    w.advance()
    with pytest.raises(ActorNotFound):
        w.actor_transform_payload(vid)
    with pytest.raises(ActorNotFound):
        w.destroy_actor(vid)


def test_spawn_destroy_restores_state_modulo_ids():
    w = _world()
    w.spawn_actor("vehicle", (0.0, 0.0, 75.0))
    before = w.serialize_state()
    drone = w.spawn_actor("drone", (2000.0, 0.0, 1000.0))
    w.destroy_actor(drone)
    after = w.serialize_state()
    assert after["retired_ids"] == before["retired_ids"] + [drone]
    assert after["next_actor_id"] == before["next_actor_id"] + 1
    for key in ("tick", "sim_time", "actors", "sensors", "weather", "rng"):
        assert after[key] == before[key]


def test_unknown_kind_and_bad_position():
    w = _world()
    with pytest.raises(InvalidInput):
        w.spawn_actor("boat", (0.0, 0.0, 0.0))
    with pytest.raises(InvalidInput):
        w.spawn_actor("vehicle", (0.0, float("nan"), 0.0))
    with pytest.raises(InvalidInput):
        w.spawn_actor("vehicle", (0.0, 0.0))


def test_map_obstacles_spawn_by_default():
    w = World()
    assert len(w.actors) == 4
    assert all(a.kind == "static" for a in w.actors.values())
    with pytest.raises(MapNotFound):
        World(map_name="nowhere")


# --- command queue ------------------------------------------------------------


def test_commands_apply_in_arrival_order():
    w = _world()
    vid = w.spawn_actor("vehicle", (0.0, 0.0, 75.0))
    early = Command("set_autopilot", {"actor_id": vid, "enabled": True, "speed": 700.0},
                    arrival_ns=1, priority=AERIAL_PRIORITY, seq=0)
    late = Command("set_autopilot", {"actor_id": vid, "enabled": True, "speed": 300.0},
                   arrival_ns=2, priority=GROUND_PRIORITY, seq=1)
    w.advance([late, early])           # passed out of order on purpose
    assert w.actors[vid].state.cruise_speed == 300.0


def test_ground_wins_arrival_ties():
    w = _world()
    vid = w.spawn_actor("vehicle", (0.0, 0.0, 75.0))
    ground = Command("set_autopilot", {"actor_id": vid, "enabled": True, "speed": 300.0},
                     arrival_ns=5, priority=GROUND_PRIORITY, seq=0)
    aerial = Command("set_autopilot", {"actor_id": vid, "enabled": True, "speed": 700.0},
                     arrival_ns=5, priority=AERIAL_PRIORITY, seq=1)
    w.advance([aerial, ground])
    # Ground applies first on a tie, so the aerial write lands last.
    assert w.actors[vid].state.cruise_speed == 700.0


def test_failing_command_never_blocks_the_tick():
    w = _world()
    bad = Command("destroy_actor", {"actor_id": 999})
    good = Command("spawn_actor", {"kind": "static", "position": [0.0, 0.0, 100.0]},
                   arrival_ns=1, seq=1)
    result = w.advance([bad, good])
    assert w.tick == 1
    assert not bad.outcome.ok and isinstance(bad.outcome.error, ActorNotFound)
    assert good.outcome.ok and good.outcome.value["actor_id"] in w.actors
    assert result.tick == 1


def test_unknown_command_is_an_error_outcome():
    w = _world()
    cmd = Command("warp_reality", {})
    w.advance([cmd])
    assert not cmd.outcome.ok
    assert isinstance(cmd.outcome.error, InvalidInput)


# --- determinism ---------------------------------------------------------------


def _trace():
    return {
        0: [
            Command("spawn_actor", {"kind": "vehicle", "position": [0.0, 0.0, 75.0],
                                    "params": {"autopilot": True}}),
            Command("spawn_actor", {"kind": "drone", "position": [3000.0, 0.0, 1000.0]},
                    arrival_ns=1, priority=AERIAL_PRIORITY, seq=1),
        ],
        1: [Command("enable_api_control", {"enabled": True}, priority=AERIAL_PRIORITY)],
        2: [Command("set_velocity", {"velocity": [1.0, -0.5, -0.2]}, priority=AERIAL_PRIORITY)],
        3: [Command("set_weather", {"name": "HardRainNoon"})],
    }


def _run_trace(seed, ticks=60):
    w = _world(seed=seed)
    trace = _trace()
    for t in range(ticks):
        w.advance(trace.get(t, []))
    return w


def test_same_seed_same_trace_is_bit_identical():
    assert _digest(_run_trace(42)) == _digest(_run_trace(42))


def test_per_tick_states_match_under_replay():
    a, b = _world(seed=7), _world(seed=7)
    trace_a, trace_b = _trace(), _trace()
    for t in range(40):
        a.advance(trace_a.get(t, []))
        b.advance(trace_b.get(t, []))
        assert _digest(a) == _digest(b)


# --- drones through the world surface -------------------------------------------


def test_substep_counters():
    w = _world()
    w.spawn_actor("drone", (0.0, 0.0, 1000.0))
    for _ in range(20):
        w.advance()
        assert w.last_tick_substeps == 50
    assert w.substeps_executed == 20 * 50


def test_two_drones_double_the_substeps():
    w = _world()
    w.spawn_actor("drone", (0.0, 0.0, 1000.0))
    w.spawn_actor("drone", (5000.0, 0.0, 1000.0))
    w.advance()
    assert w.last_tick_substeps == 100


def test_cross_api_pose_coherence():
    w = _world()
    spawn = (3000.0, -2000.0, 1000.0)
    did = w.spawn_actor("drone", spawn)
    w.enable_api_control(did, True)
    w.set_velocity(did, [1.0, 0.5, -0.3])
    for _ in range(30):
        w.advance()
    ue = np.array(w.actor_transform_payload(did)["pose"]["position"])
    ned = np.array(w.multirotor_state_payload(did)["position"])
    assert np.allclose(ue_to_ned_position(ue, spawn), ned, atol=1e-9)


def test_default_drone_is_lowest_id():
    w = _world()
    a = w.spawn_actor("drone", (0.0, 0.0, 1000.0))
    w.spawn_actor("drone", (5000.0, 0.0, 1000.0))
    w.enable_api_control(None, True)
    assert w.actors[a].state.api_control_enabled
    w.advance()
    state = w.multirotor_state_payload(None)
    assert state["id"] == a


def test_velocity_command_gates():
    w = _world()
    did = w.spawn_actor("drone", (0.0, 0.0, 1000.0))
    with pytest.raises(ControlNotEnabled):
        w.set_velocity(did, [1.0, 0.0, 0.0])
    with pytest.raises(ActorNotFound):
        w.set_velocity(999, [1.0, 0.0, 0.0])
    with pytest.raises(ControlNotEnabled):
        w.takeoff_to(did, 5.0)
    w.enable_api_control(did, True)
    with pytest.raises(InvalidInput):
        w.takeoff_to(did, -2.0)


def test_disable_control_clears_command():
    w = _world()
    did = w.spawn_actor("drone", (0.0, 0.0, 1000.0))
    w.enable_api_control(did, True)
    w.set_velocity(did, [2.0, 0.0, 0.0])
    w.enable_api_control(did, False)
    assert np.array_equal(w.actors[did].state.commanded_velocity, np.zeros(3))


# --- weather ---------------------------------------------------------------------


def test_weather_set_and_unknown():
    w = _world()
    w.set_weather("HardRainNoon")
    w.advance()
    payload = w.world_snapshot_payload()
    assert payload["weather"]["name"] == "HardRainNoon"
    assert payload["weather"]["illumination"] == 0.45
    with pytest.raises(WeatherNotFound):
        w.set_weather("Sharknado")
    cmd = Command("set_weather", {"name": "Sharknado"})
    w.advance([cmd])
    assert isinstance(cmd.outcome.error, WeatherNotFound)


# --- sensors through the world ----------------------------------------------------


def test_attach_capture_detach():
    w = _world()
    did = w.spawn_actor("drone", (0.0, 0.0, 1000.0))
    sid = w.attach_sensor(did, "depth", width=9, height=9,
                          mount_orientation=(0.7071067811865476, 0.0, 0.7071067811865476, 0.0))
    assert sid not in w.last_record.streams     # nothing until the next tick
    w.advance()
    payload = w.last_record.streams[sid]
    assert payload.tick == w.tick
    assert abs(float(payload.data[4, 4]) - 10.0) < 1e-6
    w.detach_sensor(sid)
    w.advance()
    assert sid not in w.last_record.streams
    with pytest.raises(ActorNotFound):
        w.detach_sensor(sid)


def test_attach_to_missing_parent():
    w = _world()
    with pytest.raises(ActorNotFound):
        w.attach_sensor(123, "depth")


def test_destroy_parent_detaches_sensors():
    w = _world()
    did = w.spawn_actor("drone", (0.0, 0.0, 1000.0))
    sid = w.attach_sensor(did, "gnss")
    w.destroy_actor(did)
    assert sid not in w.sensors


def test_snapshot_arrays_are_frozen():
    w = _world()
    w.spawn_actor("vehicle", (0.0, 0.0, 75.0))
    w.advance()
    view = w.snapshot.actors[0]
    with pytest.raises(ValueError):
        view.position[0] = 1.0


# --- recording ---------------------------------------------------------------------


def test_recording_lifecycle(tmp_path):
    w = _world()
    did = w.spawn_actor("drone", (0.0, 0.0, 1000.0))
    w.attach_sensor(did, "gnss")
    assert w.stop_recording() == {"ticks_written": 0}
    w.start_recording(tmp_path)
    for _ in range(3):
        w.advance()
    stats = w.stop_recording()
    assert stats["ticks_written"] == 3
    assert sorted(p.name for p in tmp_path.iterdir()) == [
        "tick_00000001", "tick_00000002", "tick_00000003",
    ]
    w.advance()
    assert sorted(p.name for p in tmp_path.iterdir())[-1] == "tick_00000003"
