"""Error types shared by the kernel, the RPC surface, and the tooling.

Domain errors carry small positive codes that cross the wire unchanged;
protocol-level failures use JSON-RPC style negative codes.
"""

from __future__ import annotations


class SimError(Exception):
    """Base class for simulator errors carrying a wire-protocol code."""

    code = -32000

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__


class ActorNotFound(SimError):
    code = 1


class SpawnCollision(SimError):
    code = 2


class ControlNotEnabled(SimError):
    code = 3


class CommandOutOfRange(SimError):
    code = 4


class WeatherNotFound(SimError):
    code = 5


class ModeError(SimError):
    code = 6


class MapNotFound(SimError):
    code = 7


class InvalidInput(SimError):
    code = 8


class RouteExhausted(SimError):
    code = 9


class ConfigError(SimError):
    code = 10


class WriteError(SimError):
    code = 11


class StatError(SimError):
    code = 12


class ConnectError(SimError):
    code = 13


class BridgeError(SimError):
    code = 14


class ResetError(SimError):
    code = 15


class EpisodeDone(SimError):
    code = 16


class BindError(SimError):
    code = 17


class ProtocolError(SimError):
    """Framing or envelope violation; the offending connection is closed."""

    code = -32700


class UnknownMethod(SimError):
    code = -32601


_DOMAIN_ERRORS = (
    ActorNotFound,
    SpawnCollision,
    ControlNotEnabled,
    CommandOutOfRange,
    WeatherNotFound,
    ModeError,
    MapNotFound,
    InvalidInput,
    RouteExhausted,
    ConfigError,
    WriteError,
    StatError,
    ConnectError,
    BridgeError,
    ResetError,
    EpisodeDone,
    BindError,
    UnknownMethod,
)

CODE_TO_ERROR = {cls.code: cls for cls in _DOMAIN_ERRORS}


def error_for_code(code: int, message: str) -> SimError:
    """Rebuild the typed exception for a wire error object."""
    cls = CODE_TO_ERROR.get(code, SimError)
    err = cls(message)
    err.code = code
    return err
