"""Blocking RPC client sessions for the two endpoints.

This is the in-package plumbing the harness and the workflows use to act as
ordinary network clients of the kernel. A session is one TCP connection;
calls are serialized per session and responses are matched by request id.
"""

from __future__ import annotations

import base64
import itertools
import socket
import threading

from .dataset import decode_stream
from .errors import ConnectError, ProtocolError, error_for_code
from .wire import decode_message, recv_frame, send_message


class Session:
    """One connection speaking the length-prefixed JSON protocol."""

    # The timeout exists to turn protocol deadlocks into errors instead of
    # hangs; it is deliberately generous so that a stall of the host machine
    # is not mistaken for a dead kernel (which shows up as EOF, not silence).
    def __init__(self, host: str, port: int, timeout: float | None = 300.0):
        self.address = (host, port)
        try:
            self.sock = socket.create_connection(self.address, timeout=timeout)
        except OSError as exc:
            raise ConnectError(f"cannot connect to {host}:{port}: {exc}") from exc
        self.sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._ids = itertools.count(1)
        self._lock = threading.Lock()
        self._stash: dict[int, dict] = {}

    def send(self, method: str, params: dict | None = None) -> int:
        """Fire a request without waiting; pair with :meth:`recv`.

        Mutating calls only answer after the tick that applies them, so a
        synchronous-mode client pipelines: send the command, send or issue the
        tick, then collect the command's response.
        """
        req_id = next(self._ids)
        with self._lock:
            try:
                send_message(self.sock, {"id": req_id, "method": method, "params": params or {}})
            except OSError as exc:
                raise ConnectError(f"session to {self.address} failed: {exc}") from exc
        return req_id

    def recv(self, req_id: int):
        """Response for a previously sent request; responses may interleave."""
        while True:
            response = self._stash.pop(req_id, None)
            if response is None:
                with self._lock:
                    try:
                        payload = recv_frame(self.sock)
                    except OSError as exc:
                        raise ConnectError(f"session to {self.address} failed: {exc}") from exc
                if payload is None:
                    raise ConnectError(f"session to {self.address} closed by peer")
                response = decode_message(payload)
                got = response.get("id")
                if got != req_id:
                    if not isinstance(got, int):
                        raise ProtocolError(f"response id {got!r} is not an integer")
                    self._stash[got] = response
                    continue
            if "error" in response:
                err = response["error"]
                raise error_for_code(int(err["code"]), str(err.get("message", "")))
            return response.get("result")

    def call(self, method: str, params: dict | None = None):
        return self.recv(self.send(method, params))

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class GroundClient(Session):
    """Typed wrappers for the ground control plane."""

    def ping(self):
        return self.call("ping")

    def world_snapshot(self):
        return self.call("world_snapshot")

    def actor_transform(self, actor_id: int):
        return self.call("actor_transform", {"actor_id": actor_id})

    def spawn_actor(self, kind: str, position, heading: float = 0.0,
                    bbox=None, **params):
        req = {"kind": kind, "position": list(position), "heading": heading}
        if bbox is not None:
            req["bbox"] = list(bbox)
        if params:
            req["params"] = params
        return self.call("spawn_actor", req)["actor_id"]

    def destroy_actor(self, actor_id: int):
        return self.call("destroy_actor", {"actor_id": actor_id})

    def set_autopilot(self, actor_id: int, enabled: bool, speed: float | None = None):
        params = {"actor_id": actor_id, "enabled": enabled}
        if speed is not None:
            params["speed"] = speed
        return self.call("set_autopilot", params)

    def set_weather(self, name: str):
        return self.call("set_weather", {"name": name})

    def attach_sensor(self, actor_id: int, modality: str, width: int = 64, height: int = 64,
                      mount_position=(0.0, 0.0, 0.0), mount_orientation=(1.0, 0.0, 0.0, 0.0)):
        return self.call("attach_sensor", {
            "actor_id": actor_id, "modality": modality,
            "width": width, "height": height,
            "mount_position": list(mount_position),
            "mount_orientation": list(mount_orientation),
        })["sensor_id"]

    def set_sync_mode(self, enabled: bool):
        return self.call("set_sync_mode", {"enabled": enabled})

    def tick(self) -> int:
        return self.call("tick")["tick"]

    def record_meta(self):
        return self.call("record_meta")

    def start_recording(self, record_dir):
        return self.call("start_recording", {"record_dir": str(record_dir)})

    def stop_recording(self):
        return self.call("stop_recording")


class AerialClient(Session):
    """Typed wrappers for the aerial vehicle API."""

    def ping(self):
        return self.call("ping")

    def multirotor_state(self, actor_id: int | None = None):
        params = {} if actor_id is None else {"actor_id": actor_id}
        return self.call("multirotor_state", params)

    def enable_api_control(self, enabled: bool, actor_id: int | None = None):
        params = {"enabled": enabled}
        if actor_id is not None:
            params["actor_id"] = actor_id
        return self.call("enable_api_control", params)

    def set_velocity(self, velocity, actor_id: int | None = None):
        params = {"velocity": [float(v) for v in velocity]}
        if actor_id is not None:
            params["actor_id"] = actor_id
        return self.call("set_velocity", params)

    def takeoff_to(self, altitude_m: float, actor_id: int | None = None):
        params = {"altitude": float(altitude_m)}
        if actor_id is not None:
            params["actor_id"] = actor_id
        return self.call("takeoff_to", params)

    def capture_image(self, modality: str = "depth", width: int = 64, height: int = 64,
                      mount: str = "down", actor_id: int | None = None, decode: bool = True):
        params = {"modality": modality, "width": width, "height": height, "mount": mount}
        if actor_id is not None:
            params["actor_id"] = actor_id
        result = self.call("capture_image", params)
        if decode:
            result["data"] = decode_stream(base64.b64decode(result["data_b64"]))
        return result
