"""Dual RPC servers over one world: ground control plane and aerial API.

Both endpoints are plain TCP listeners speaking the length-prefixed JSON
protocol, bound to loopback by default. Read-only methods answer immediately
from the latest tick snapshot; mutating methods enqueue a command and respond
only after the tick that applied it. Commands from the two endpoints merge
into a single queue ordered by arrival time, ties broken ground-first.

Tick ownership: in synchronous mode the world advances only on a `tick`
request from the ground API; in asynchronous mode a driver thread advances the
world continuously (optionally paced to the render step in real time).
`set_sync_mode` is a control-plane call applied immediately, not queued -
queuing it would deadlock the very client that needs the mode to change.

One live server pair per process: the single-process architecture is enforced
here rather than on the world object, which stays freely constructible for
embedding and tests.
"""

from __future__ import annotations

import base64
import logging
import socket
import threading
import time

from .dataset import encode_stream
from .errors import (
    ActorNotFound,
    BindError,
    ConfigError,
    ConnectError,
    InvalidInput,
    ModeError,
    ProtocolError,
    SimError,
    UnknownMethod,
)
from .sensors import DOWNWARD_MOUNT, FORWARD_MOUNT, SensorSpec, render
from .wire import decode_message, recv_frame, send_message
from .world import AERIAL_PRIORITY, GROUND_PRIORITY, Command, World

log = logging.getLogger(__name__)

GROUND_METHODS_READONLY = ("world_snapshot", "actor_transform", "record_meta", "ping")
GROUND_METHODS_MUTATING = (
    "spawn_actor", "destroy_actor", "set_weather", "set_autopilot",
    "attach_sensor", "start_recording", "stop_recording",
)
AERIAL_METHODS_READONLY = ("multirotor_state", "capture_image", "ping")
AERIAL_METHODS_MUTATING = ("set_velocity", "enable_api_control", "takeoff_to")


class _QueuedCommand:
    __slots__ = ("cmd", "event")

    def __init__(self, cmd: Command):
        self.cmd = cmd
        self.event = threading.Event()


class SimServer:
    _active: "SimServer | None" = None
    _active_lock = threading.Lock()

    def __init__(self, world: World, host: str = "127.0.0.1",
                 ground_port: int = 2000, aerial_port: int = 41451,
                 realtime: bool = False, sync_start: bool = False):
        if ground_port == aerial_port and ground_port != 0:
            raise ConfigError("ground and aerial ports must be distinct")
        self.world = world
        self.host = host
        self._ports = (ground_port, aerial_port)
        self.realtime = realtime
        # sync_start boots the kernel paused, so every tick comes from a
        # client and a seeded run is reproducible from tick zero.
        self.sync_mode = bool(sync_start)

        self._world_lock = threading.Lock()
        self._queue: list[_QueuedCommand] = []
        self._queue_lock = threading.Lock()
        self._seq = 0
        self._stop = threading.Event()
        self._listeners: list[socket.socket] = []
        self._threads: list[threading.Thread] = []
        self._conns: set[socket.socket] = set()
        self._conns_lock = threading.Lock()
        self._started = False

    # --------------------------------------------------------------- lifecycle

    def start(self) -> "SimServer":
        with SimServer._active_lock:
            if SimServer._active is not None:
                raise ConfigError("a simulator server pair is already live in this process")
            SimServer._active = self
        try:
            for port, api in zip(self._ports, ("ground", "aerial")):
                sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
                sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
                try:
                    sock.bind((self.host, port))
                except OSError as exc:
                    sock.close()
                    raise BindError(f"cannot bind {api} endpoint on {self.host}:{port}: {exc}") from exc
                sock.listen(32)
                self._listeners.append(sock)
                t = threading.Thread(target=self._accept_loop, args=(sock, api),
                                     name=f"agsim-accept-{api}", daemon=True)
                t.start()
                self._threads.append(t)
            driver = threading.Thread(target=self._drive_loop, name="agsim-tick-driver", daemon=True)
            driver.start()
            self._threads.append(driver)
            self._started = True
        except Exception:
            with SimServer._active_lock:
                SimServer._active = None
            raise
        return self

    @property
    def ground_address(self) -> tuple[str, int]:
        return self._listeners[0].getsockname()[:2]

    @property
    def aerial_address(self) -> tuple[str, int]:
        return self._listeners[1].getsockname()[:2]

    def close(self) -> None:
        self._stop.set()
        for sock in self._listeners:
            # shutdown() wakes a thread parked in accept(); close() alone
            # can leave it blocked until the next connection attempt.
            try:
                sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                sock.close()
            except OSError:
                pass
        with self._conns_lock:
            conns = list(self._conns)
        for conn in conns:
            try:
                conn.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                conn.close()
            except OSError:
                pass
        with self._queue_lock:
            pending = self._queue
            self._queue = []
        for qc in pending:
            qc.cmd.outcome = None
            qc.event.set()
        for t in self._threads:
            t.join(timeout=5.0)
        with SimServer._active_lock:
            if SimServer._active is self:
                SimServer._active = None

    def __enter__(self) -> "SimServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.close()

    # -------------------------------------------------------------- tick drive

    def _drive_loop(self) -> None:
        next_deadline = time.monotonic()
        while not self._stop.is_set():
            if self.sync_mode:
                time.sleep(0.001)
                next_deadline = time.monotonic()
                continue
            self._advance_once(only_async=True)
            if self.realtime:
                next_deadline += self.world.dt_render
                delay = next_deadline - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
                else:
                    next_deadline = time.monotonic()

    def _advance_once(self, only_async: bool = False) -> int:
        with self._world_lock:
            # Re-checked under the lock so a mode flip can act as a barrier:
            # once set_sync_mode(True) has held this lock, no further driver
            # tick can slip in.
            if only_async and self.sync_mode:
                return self.world.tick
            with self._queue_lock:
                batch = self._queue
                self._queue = []
            result = self.world.advance([qc.cmd for qc in batch])
        for qc in batch:
            qc.event.set()
        return result.tick

    def _enqueue_nowait(self, method: str, params: dict, priority: int) -> _QueuedCommand:
        with self._queue_lock:
            self._seq += 1
            qc = _QueuedCommand(Command(
                method=method, params=params,
                arrival_ns=time.monotonic_ns(), priority=priority, seq=self._seq,
            ))
            self._queue.append(qc)
        return qc

    def _enqueue(self, method: str, params: dict, priority: int) -> Command:
        qc = self._enqueue_nowait(method, params, priority)
        qc.event.wait()
        if qc.cmd.outcome is None:
            raise ConnectError("server closed before the command was applied")
        return qc.cmd

    # ---------------------------------------------------------------- sockets

    def _accept_loop(self, listener: socket.socket, api: str) -> None:
        while not self._stop.is_set():
            try:
                conn, _ = listener.accept()
            except OSError:
                return
            conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            with self._conns_lock:
                self._conns.add(conn)
            t = threading.Thread(target=self._serve_connection, args=(conn, api),
                                 name=f"agsim-conn-{api}", daemon=True)
            t.start()

    def _serve_connection(self, conn: socket.socket, api: str) -> None:
        write_lock = threading.Lock()
        try:
            while not self._stop.is_set():
                try:
                    payload = recv_frame(conn)
                except ProtocolError as exc:
                    log.warning("%s connection dropped: %s", api, exc)
                    return
                except OSError:
                    return
                if payload is None:
                    return
                try:
                    request = decode_message(payload)
                    req_id = request["id"]
                    method = request["method"]
                    params = request.get("params") or {}
                    if not isinstance(method, str) or not isinstance(params, dict):
                        raise ProtocolError("method must be a string and params an object")
                except (ProtocolError, KeyError) as exc:
                    log.warning("%s connection sent a malformed request: %s", api, exc)
                    return
                if self._is_queued(api, method):
                    # Enqueue in the reader thread: a later request on this
                    # same connection (a tick, a barrier ping) is then
                    # guaranteed to see the command already queued.
                    priority = GROUND_PRIORITY if api == "ground" else AERIAL_PRIORITY
                    qc = self._enqueue_nowait(method, params, priority)
                    t = threading.Thread(
                        target=self._respond_queued, args=(conn, write_lock, req_id, qc),
                        name=f"agsim-req-{method}", daemon=True,
                    )
                    t.start()
                elif api == "ground" and method == "tick":
                    t = threading.Thread(
                        target=self._respond, args=(conn, write_lock, api, req_id, method, params),
                        name="agsim-req-tick", daemon=True,
                    )
                    t.start()
                else:
                    self._respond(conn, write_lock, api, req_id, method, params)
        finally:
            with self._conns_lock:
                self._conns.discard(conn)
            try:
                conn.close()
            except OSError:
                pass

    @staticmethod
    def _is_queued(api: str, method: str) -> bool:
        if api == "ground":
            return method in GROUND_METHODS_MUTATING
        return method in AERIAL_METHODS_MUTATING

    def _respond_queued(self, conn, write_lock, req_id, qc: "_QueuedCommand") -> None:
        qc.event.wait()
        if qc.cmd.outcome is None:
            message = {"id": req_id, "error": {
                "code": ConnectError.code,
                "message": "server closed before the command was applied"}}
        elif qc.cmd.outcome.ok:
            message = {"id": req_id, "result": qc.cmd.outcome.value}
        else:
            err = qc.cmd.outcome.error
            message = {"id": req_id, "error": {"code": err.code, "message": err.message}}
        try:
            with write_lock:
                send_message(conn, message)
        except (OSError, ProtocolError):
            pass

    def _respond(self, conn, write_lock, api, req_id, method, params) -> None:
        try:
            result = self._dispatch(api, method, params)
            message = {"id": req_id, "result": result}
        except SimError as exc:
            message = {"id": req_id, "error": {"code": exc.code, "message": exc.message}}
        except Exception as exc:  # never let a handler take the connection down silently
            log.exception("unhandled error in %s.%s", api, method)
            message = {"id": req_id, "error": {"code": -32000, "message": f"internal error: {exc}"}}
        try:
            with write_lock:
                send_message(conn, message)
        except (OSError, ProtocolError):
            pass

    # --------------------------------------------------------------- dispatch

    def _dispatch(self, api: str, method: str, params: dict):
        if api == "ground":
            return self._dispatch_ground(method, params)
        return self._dispatch_aerial(method, params)

    def _dispatch_ground(self, method: str, params: dict):
        if method == "ping":
            return {"pong": True, "api": "ground"}
        if method == "world_snapshot":
            return self.world.world_snapshot_payload()
        if method == "actor_transform":
            return self.world.actor_transform_payload(int(params["actor_id"]))
        if method == "record_meta":
            return self.world.record_meta_payload()
        if method == "set_sync_mode":
            self.sync_mode = bool(params["enabled"])
            with self._world_lock:
                pass    # wait out any in-flight advance before answering
            return {"sync_mode": self.sync_mode}
        if method == "tick":
            if not self.sync_mode:
                raise ModeError("tick is only valid in synchronous mode")
            return {"tick": self._advance_once()}
        if method in GROUND_METHODS_MUTATING:
            return self._finish(self._enqueue(method, params, GROUND_PRIORITY))
        raise UnknownMethod(f"unknown ground method {method!r}")

    def _dispatch_aerial(self, method: str, params: dict):
        if method == "ping":
            return {"pong": True, "api": "aerial"}
        if method == "multirotor_state":
            return self.world.multirotor_state_payload(params.get("actor_id"))
        if method == "capture_image":
            return self._capture_image(params)
        if method in AERIAL_METHODS_MUTATING:
            return self._finish(self._enqueue(method, params, AERIAL_PRIORITY))
        raise UnknownMethod(f"unknown aerial method {method!r}")

    @staticmethod
    def _finish(cmd: Command):
        if cmd.outcome.ok:
            return cmd.outcome.value
        raise cmd.outcome.error

    def _capture_image(self, params: dict) -> dict:
        """Ad-hoc render from the latest snapshot, encoded as a stream blob."""
        snap = self.world.snapshot
        actor_id = params.get("actor_id")
        if actor_id is None:
            drones = sorted(snap.drones)
            if not drones:
                raise ActorNotFound("no drone to capture from")
            actor_id = drones[0]
        mount = params.get("mount", "down")
        if mount == "down":
            mount_q = tuple(DOWNWARD_MOUNT)
        elif mount == "forward":
            mount_q = tuple(FORWARD_MOUNT)
        else:
            raise InvalidInput(f"unknown mount {mount!r}")
        spec = SensorSpec(
            0, int(actor_id), params.get("modality", "depth"),
            int(params.get("width", 64)), int(params.get("height", 64)),
            mount_orientation=mount_q,
        )
        data = render(spec, snap)
        h, w = (1, data.shape[0]) if data.ndim == 1 else data.shape
        return {
            "tick": snap.tick,
            "modality": spec.modality,
            "width": int(w),
            "height": int(h),
            "dtype": data.dtype.name,
            "data_b64": base64.b64encode(encode_stream(data)).decode("ascii"),
        }
