"""Length-prefixed JSON framing over raw socket pairs."""

import json
import socket
import struct

import pytest

from agsim.errors import ProtocolError
from agsim.wire import (
    MAX_FRAME_BYTES,
    decode_message,
    recv_frame,
    send_frame,
    send_message,
)


@pytest.fixture
def pair():
    a, b = socket.socketpair()
    yield a, b
    a.close()
    b.close()


def test_frame_round_trip(pair):
    a, b = pair
    send_frame(a, b"hello world")
    assert recv_frame(b) == b"hello world"


def test_header_is_big_endian_length(pair):
    a, b = pair
    send_frame(a, b"hello")
    raw = b.recv(9)
    assert raw[:4] == struct.pack(">I", 5)
    assert raw[4:] == b"hello"


def test_frames_preserve_order(pair):
    a, b = pair
    for i in range(5):
        send_message(a, {"id": i, "method": "ping", "params": {}})
    for i in range(5):
        assert decode_message(recv_frame(b))["id"] == i


def test_empty_payload_round_trips(pair):
    a, b = pair
    send_frame(a, b"")
    assert recv_frame(b) == b""


def test_unicode_round_trips(pair):
    a, b = pair
    send_message(a, {"id": 1, "method": "ping", "params": {"name": "Grünwald"}})
    msg = decode_message(recv_frame(b))
    assert msg["params"]["name"] == "Grünwald"


def test_oversized_send_refused(pair):
    a, _ = pair
    with pytest.raises(ProtocolError):
        send_frame(a, bytes(MAX_FRAME_BYTES + 1))


def test_oversized_header_refused(pair):
    a, b = pair
    a.sendall(struct.pack(">I", MAX_FRAME_BYTES + 1))
    with pytest.raises(ProtocolError):
        recv_frame(b)


def test_clean_eof_is_none(pair):
    a, b = pair
    a.close()
    assert recv_frame(b) is None


def test_eof_mid_header_raises(pair):
    a, b = pair
    a.sendall(b"\x00\x00")
    a.close()
    with pytest.raises(ProtocolError):
        recv_frame(b)


def test_eof_mid_payload_raises(pair):
    a, b = pair
    a.sendall(struct.pack(">I", 10) + b"abc")
    a.close()
    with pytest.raises(ProtocolError):
        recv_frame(b)


def test_decode_rejects_malformed():
    with pytest.raises(ProtocolError):
        decode_message(b"{not json")
    with pytest.raises(ProtocolError):
        decode_message(b"[1, 2, 3]")          # not an object
    with pytest.raises(ProtocolError):
        decode_message(b"\xff\xfe")           # not UTF-8
    assert decode_message(json.dumps({"id": 1}).encode()) == {"id": 1}
