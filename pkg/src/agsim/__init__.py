"""Single-process air-ground co-simulation kernel with dual RPC surfaces.

One fixed-tick world serves two wire-compatible TCP endpoints: a ground API
for vehicles, pedestrians, weather, sensors, and stepping, and an aerial API
for velocity-controlled drones. Commands from both surfaces queue to the tick
boundary and apply in arrival order, so every attached sensor stream observes
one consistent world per tick.
"""

from .aerial import DroneState, PhysicsConfig, substep_count
from .client import AerialClient, GroundClient, Session
from .embed import EmbeddedSim
from .errors import (
    ActorNotFound,
    BindError,
    BridgeError,
    CommandOutOfRange,
    ConfigError,
    ConnectError,
    ControlNotEnabled,
    EpisodeDone,
    InvalidInput,
    MapNotFound,
    ModeError,
    ProtocolError,
    ResetError,
    RouteExhausted,
    SimError,
    SpawnCollision,
    StatError,
    UnknownMethod,
    WeatherNotFound,
    WriteError,
)
from .frames import (
    OriginOffset,
    PoseNED,
    PoseUE,
    co_register,
    compute_origin_offset,
    ned_to_ue_pose,
    ned_to_ue_position,
    ned_to_ue_quat,
    ned_to_ue_velocity,
    ue_to_ned_pose,
    ue_to_ned_position,
    ue_to_ned_quat,
    ue_to_ned_velocity,
)
from .server import SimServer
from .world import World

__version__ = "0.1.0"

__all__ = [
    "AerialClient",
    "ActorNotFound",
    "BindError",
    "BridgeError",
    "CommandOutOfRange",
    "ConfigError",
    "ConnectError",
    "ControlNotEnabled",
    "DroneState",
    "EmbeddedSim",
    "EpisodeDone",
    "GroundClient",
    "InvalidInput",
    "MapNotFound",
    "ModeError",
    "OriginOffset",
    "PhysicsConfig",
    "PoseNED",
    "PoseUE",
    "ProtocolError",
    "ResetError",
    "RouteExhausted",
    "Session",
    "SimError",
    "SimServer",
    "SpawnCollision",
    "StatError",
    "UnknownMethod",
    "WeatherNotFound",
    "World",
    "WriteError",
    "co_register",
    "compute_origin_offset",
    "ned_to_ue_pose",
    "ned_to_ue_position",
    "ned_to_ue_quat",
    "ned_to_ue_velocity",
    "substep_count",
    "ue_to_ned_pose",
    "ue_to_ned_position",
    "ue_to_ned_quat",
    "ue_to_ned_velocity",
    "__version__",
]
