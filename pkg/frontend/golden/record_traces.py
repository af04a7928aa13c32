#!/usr/bin/env python3
"""Record golden wire traces for the TypeScript client tests.

Boots the kernel CLI exactly the way those tests do (synchronous boot, fixed
seed, ephemeral ports), drives a fixed call sequence over raw sockets, and
writes every frame — request and response bytes plus their parsed values —
to traces.json. Rerunning against an unchanged kernel reproduces the values
exactly, which is what lets the tests replay the sequence live and demand
value equality.
"""

from __future__ import annotations

import json
import socket
import struct
import subprocess
import sys
from pathlib import Path

HEADER = struct.Struct(">I")
SEED = 123
OUT = Path(__file__).resolve().parent / "traces.json"


class TapedSession:
    """Raw-socket session that logs every frame it sends or receives."""

    def __init__(self, name: str, host: str, port: int, ops: list):
        self.name = name
        self.sock = socket.create_connection((host, port), timeout=60.0)
        self.sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self.next_id = 1
        self.stash: dict[int, tuple[bytes, dict]] = {}
        self.ops = ops

    def send(self, method: str, params: dict | None = None) -> int:
        req_id = self.next_id
        self.next_id += 1
        payload = json.dumps(
            {"id": req_id, "method": method, "params": params or {}}
        ).encode("utf-8")
        frame = HEADER.pack(len(payload)) + payload
        self.sock.sendall(frame)
        self.ops.append({
            "op": "send", "endpoint": self.name, "id": req_id,
            "method": method, "params": params or {}, "frame_hex": frame.hex(),
        })
        return req_id

    def recv(self, req_id: int) -> dict:
        while req_id not in self.stash:
            frame, message = self._read_frame()
            self.stash[message["id"]] = (frame, message)
        frame, message = self.stash.pop(req_id)
        op = {"op": "recv", "endpoint": self.name, "id": req_id,
              "frame_hex": frame.hex()}
        if "error" in message:
            op["error"] = message["error"]
        else:
            op["result"] = message["result"]
        self.ops.append(op)
        return message

    def call(self, method: str, params: dict | None = None) -> dict:
        return self.recv(self.send(method, params))

    def _read_frame(self) -> tuple[bytes, dict]:
        header = self._exact(HEADER.size)
        (length,) = HEADER.unpack(header)
        payload = self._exact(length)
        return header + payload, json.loads(payload.decode("utf-8"))

    def _exact(self, n: int) -> bytes:
        buf = b""
        while len(buf) < n:
            chunk = self.sock.recv(n - len(buf))
            if not chunk:
                raise ConnectionError("kernel closed the connection")
            buf += chunk
        return buf


def main() -> None:
    proc = subprocess.Popen(
        ["agsim", "serve", "--sync", "--seed", str(SEED),
         "--ground-port", "0", "--aerial-port", "0"],
        stdout=subprocess.PIPE, text=True)
    try:
        ready = json.loads(proc.stdout.readline())
        ops: list = []
        g = TapedSession("ground", *ready["ground"], ops)
        a = TapedSession("aerial", *ready["aerial"], ops)

        g.call("ping")
        g.call("world_snapshot")

        # Mutations answer after the tick that applies them, so every batch
        # is pipelined: send, tick, then collect.
        spawn_static = g.send("spawn_actor", {
            "kind": "static", "position": [18000.0, 17000.0, 100.0],
            "heading": 0.0,
        })
        g.call("tick")
        static_id = g.recv(spawn_static)["result"]["actor_id"]

        g.call("actor_transform", {"actor_id": static_id})
        g.call("actor_transform", {"actor_id": 999999})
        g.call("warp_reality")

        set_weather = g.send("set_weather", {"name": "HardRainNoon"})
        g.call("tick")
        g.recv(set_weather)
        g.call("world_snapshot")

        a.call("ping")
        spawn_drone = g.send("spawn_actor", {
            "kind": "drone", "position": [0.0, 0.0, 1000.0],
        })
        g.call("tick")
        drone_id = g.recv(spawn_drone)["result"]["actor_id"]

        # Aerial mutations: the ping barrier guarantees the command is queued
        # before the ground tick that applies it.
        enable = a.send("enable_api_control", {"actor_id": drone_id,
                                               "enabled": True})
        a.call("ping")
        g.call("tick")
        a.recv(enable)

        too_fast = a.send("set_velocity", {"actor_id": drone_id,
                                           "velocity": [20.0, 0.0, 0.0]})
        a.call("ping")
        g.call("tick")
        a.recv(too_fast)

        cruise = a.send("set_velocity", {"actor_id": drone_id,
                                         "velocity": [1.0, 0.0, -0.5]})
        a.call("ping")
        g.call("tick")
        a.recv(cruise)

        g.call("tick")
        a.call("multirotor_state", {"actor_id": drone_id})
        a.call("capture_image", {"modality": "depth", "width": 16,
                                 "height": 12, "mount": "down",
                                 "actor_id": drone_id})

        gone = [g.send("destroy_actor", {"actor_id": static_id}),
                g.send("destroy_actor", {"actor_id": drone_id})]
        g.call("tick")
        for req in gone:
            g.recv(req)
        g.call("world_snapshot")

        OUT.write_text(json.dumps({
            "serve": {"seed": SEED, "sync": True, "dt": ready["dt"]},
            "ops": ops,
        }, indent=2) + "\n")
        print(f"wrote {OUT} ({len(ops)} ops)")
    finally:
        proc.terminate()
        proc.wait(timeout=5)


if __name__ == "__main__":
    sys.exit(main())
