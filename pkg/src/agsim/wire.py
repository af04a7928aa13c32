"""Length-prefixed JSON framing shared by both RPC endpoints.

Each frame is a 4-byte big-endian payload length followed by a UTF-8 JSON
document. Requests carry {id, method, params}; responses carry {id, result}
or {id, error: {code, message}}. Frames beyond 64 MiB are a protocol
violation and the offending connection is closed.
"""

from __future__ import annotations

import json
import socket
import struct

from .errors import ProtocolError

HEADER = struct.Struct(">I")
MAX_FRAME_BYTES = 64 * 1024 * 1024


def recv_exact(sock: socket.socket, n: int) -> bytes | None:
    """Read exactly n bytes; None on clean EOF at a frame boundary."""
    chunks = []
    remaining = n
    while remaining > 0:
        chunk = sock.recv(min(remaining, 65536))
        if not chunk:
            if remaining == n:
                return None
            raise ProtocolError("connection closed mid-frame")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def recv_frame(sock: socket.socket) -> bytes | None:
    header = recv_exact(sock, HEADER.size)
    if header is None:
        return None
    (length,) = HEADER.unpack(header)
    if length > MAX_FRAME_BYTES:
        raise ProtocolError(f"frame of {length} bytes exceeds the 64 MiB bound")
    payload = recv_exact(sock, length)
    if payload is None:
        raise ProtocolError("connection closed before frame payload")
    return payload


def send_frame(sock: socket.socket, payload: bytes) -> None:
    if len(payload) > MAX_FRAME_BYTES:
        raise ProtocolError(f"frame of {len(payload)} bytes exceeds the 64 MiB bound")
    sock.sendall(HEADER.pack(len(payload)) + payload)


def send_message(sock: socket.socket, message: dict) -> None:
    send_frame(sock, json.dumps(message).encode("utf-8"))


def decode_message(payload: bytes) -> dict:
    try:
        message = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"malformed frame: {exc}") from exc
    if not isinstance(message, dict):
        raise ProtocolError("frame payload must be a JSON object")
    return message
