"""Length-prefixed JSON frames for manager/worker traffic.

Frame = 4-byte big-endian payload length + UTF-8 JSON object.  Every
message carries a ``type`` field from ``MESSAGE_TYPES``; everything else
is message-specific.  Payloads are small (scene docs are a few KB), so
no compression.
"""

from __future__ import annotations

import json
import socket
import struct

MESSAGE_TYPES = (
    "REGISTER",
    "REGISTER_ACK",
    "HEARTBEAT",
    "PRELOAD",
    "PRELOAD_DONE",
    "EXECUTE",
    "RESULT",
    "REQUEUE",
    "ERROR",
)

MAX_FRAME = 64 * 1024 * 1024

_LEN = struct.Struct(">I")


class ProtocolError(Exception):
    pass


class ConnectionClosed(ProtocolError):
    pass


def send_msg(sock: socket.socket, msg: dict) -> None:
    if msg.get("type") not in MESSAGE_TYPES:
        raise ProtocolError(f"unknown message type {msg.get('type')!r}")
    payload = json.dumps(msg, separators=(",", ":")).encode("utf-8")
    if len(payload) > MAX_FRAME:
        raise ProtocolError(f"frame too large: {len(payload)} bytes")
    sock.sendall(_LEN.pack(len(payload)) + payload)


def _recvall(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionClosed("peer closed mid-frame" if buf else "peer closed")
        buf.extend(chunk)
    return bytes(buf)


def recv_msg(sock: socket.socket) -> dict:
    (length,) = _LEN.unpack(_recvall(sock, 4))
    if length > MAX_FRAME:
        raise ProtocolError(f"frame too large: {length} bytes")
    payload = _recvall(sock, length)
    try:
        msg = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"bad frame payload: {exc}") from exc
    if not isinstance(msg, dict) or msg.get("type") not in MESSAGE_TYPES:
        raise ProtocolError("frame is not a typed message object")
    return msg
