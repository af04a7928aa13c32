"""Run a kernel in-process on ephemeral loopback ports.

Benches, workflows, and tests talk to the kernel exactly like external
clients; embedding only removes the need to manage a second process.
"""

from __future__ import annotations

from .client import AerialClient, GroundClient
from .server import SimServer
from .world import World


class EmbeddedSim:
    def __init__(self, realtime: bool = False, host: str = "127.0.0.1",
                 sync_start: bool = False, **world_kwargs):
        self.world = World(**world_kwargs)
        self.server = SimServer(self.world, host=host, ground_port=0, aerial_port=0,
                                realtime=realtime, sync_start=sync_start)
        self._sessions = []

    def start(self) -> "EmbeddedSim":
        self.server.start()
        return self

    def ground(self) -> GroundClient:
        host, port = self.server.ground_address
        client = GroundClient(host, port)
        self._sessions.append(client)
        return client

    def aerial(self) -> AerialClient:
        host, port = self.server.aerial_address
        client = AerialClient(host, port)
        self._sessions.append(client)
        return client

    def close(self) -> None:
        for session in self._sessions:
            session.close()
        self._sessions.clear()
        self.server.close()

    def __enter__(self) -> "EmbeddedSim":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.close()
