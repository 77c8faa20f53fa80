"""Framed binary command protocol between cockpit and robot.

Frame layout (all multi-byte fields little-endian; see PROTOCOL.md):

    offset  size  field
    0       2     magic 0x48 0x4D
    2       1     version (1 = fixed 32-float payload, 2 = joint-list payload)
    3       1     type (1 = command, 2 = state, 3 = heartbeat)
    4       4     seq (u32)
    8       2     payload_len (u16)
    10      n     payload (n = payload_len)
    10+n    4     CRC-32 (IEEE) over all preceding bytes

Version-1 command/state payloads are exactly 32 little-endian float32 values
(128 bytes). Command layout: [vx, wyaw, h, 14 arm targets, 14 hand targets,
1 reserved]. Heartbeats carry an empty payload. Version-2 command payloads
are a length-prefixed joint list for robots whose upper body does not fit
the fixed slots: u16 joint count, u16 reserved, [vx, wyaw, h], then that
many float32 targets.

Decoding verifies the CRC over the whole buffer before anything else, so any
corruption (including of the header or the CRC field itself) reports BadCrc;
BadMagic/BadVersion/BadLength are reserved for well-formed but mismatched
frames. decode(encode(p)) round-trips bit-exactly (payload floats are stored
as float32).
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import BadCrc, BadLength, BadMagic, BadVersion, ShapeError

MAGIC = b"\x48\x4d"
VERSION_FIXED = 1
VERSION_JOINT_LIST = 2
SUPPORTED_VERSIONS = (VERSION_FIXED, VERSION_JOINT_LIST)

TYPE_COMMAND = 1
TYPE_STATE = 2
TYPE_HEARTBEAT = 3
PACKET_TYPES = (TYPE_COMMAND, TYPE_STATE, TYPE_HEARTBEAT)

HEADER = struct.Struct("<2sBBIH")
CRC_SIZE = 4
FIXED_PAYLOAD_FLOATS = 32
FIXED_PAYLOAD_BYTES = 4 * FIXED_PAYLOAD_FLOATS  # 128

# Version-1 command payload slots.
SLOT_VX = 0
SLOT_WYAW = 1
SLOT_HEIGHT = 2
ARM_SLOTS = slice(3, 17)
HAND_SLOTS = slice(17, 31)
SLOT_RESERVED = 31


@dataclass
class CommandPacket:
    """One decoded frame. ``payload`` is a float32 array (empty for heartbeats)."""

    ptype: int
    seq: int
    payload: np.ndarray
    version: int = VERSION_FIXED

    def __post_init__(self):
        self.payload = np.ascontiguousarray(self.payload, dtype="<f4")
        if self.version not in SUPPORTED_VERSIONS:
            raise BadVersion(f"unsupported version {self.version}")
        if self.ptype not in PACKET_TYPES:
            raise ShapeError(f"unknown packet type {self.ptype}")
        if self.version == VERSION_FIXED and self.ptype in (TYPE_COMMAND, TYPE_STATE):
            if self.payload.size != FIXED_PAYLOAD_FLOATS:
                raise ShapeError(
                    f"version-1 command/state payload must be {FIXED_PAYLOAD_FLOATS} floats, "
                    f"got {self.payload.size}"
                )
        if self.ptype == TYPE_HEARTBEAT and self.payload.size != 0:
            raise ShapeError("heartbeat payload must be empty")

    def __eq__(self, other) -> bool:
        if not isinstance(other, CommandPacket):
            return NotImplemented
        return (
            self.ptype == other.ptype
            and self.seq == other.seq
            and self.version == other.version
            and self.payload.tobytes() == other.payload.tobytes()
        )

    # -- command accessors (version 1) ---------------------------------------------

    @property
    def vx(self) -> float:
        return float(self.payload[SLOT_VX])

    @property
    def wyaw(self) -> float:
        return float(self.payload[SLOT_WYAW])

    @property
    def height(self) -> float:
        return float(self.payload[SLOT_HEIGHT])

    @property
    def arm_targets(self) -> np.ndarray:
        return self.payload[ARM_SLOTS].astype(float)

    @property
    def hand_targets(self) -> np.ndarray:
        return self.payload[HAND_SLOTS].astype(float)


def make_command(
    seq: int,
    vx: float = 0.0,
    wyaw: float = 0.0,
    height: float = 0.0,
    arm: np.ndarray | None = None,
    hand: np.ndarray | None = None,
) -> CommandPacket:
    """Build a version-1 command packet from named fields."""
    payload = np.zeros(FIXED_PAYLOAD_FLOATS, dtype="<f4")
    payload[SLOT_VX] = vx
    payload[SLOT_WYAW] = wyaw
    payload[SLOT_HEIGHT] = height
    if arm is not None:
        arm = np.asarray(arm, dtype="<f4")
        if arm.size > 14:
            raise ShapeError(f"at most 14 arm targets fit a version-1 packet, got {arm.size}")
        payload[3 : 3 + arm.size] = arm
    if hand is not None:
        hand = np.asarray(hand, dtype="<f4")
        if hand.size > 14:
            raise ShapeError(f"at most 14 hand targets fit a version-1 packet, got {hand.size}")
        payload[17 : 17 + hand.size] = hand
    return CommandPacket(ptype=TYPE_COMMAND, seq=seq, payload=payload)


def make_heartbeat(seq: int) -> CommandPacket:
    return CommandPacket(ptype=TYPE_HEARTBEAT, seq=seq, payload=np.zeros(0, dtype="<f4"))


def make_joint_list_command(seq: int, vx: float, wyaw: float, height: float, targets: np.ndarray) -> CommandPacket:
    """Build a version-2 command packet with a length-prefixed joint list."""
    targets = np.asarray(targets, dtype="<f4")
    if targets.size > 0xFFFF:
        raise ShapeError("joint list too long")
    head = np.zeros(1, dtype="<f4")
    head.view("<u2")[0] = targets.size
    payload = np.concatenate([head, np.array([vx, wyaw, height], dtype="<f4"), targets])
    return CommandPacket(ptype=TYPE_COMMAND, seq=seq, payload=payload, version=VERSION_JOINT_LIST)


def joint_list_targets(packet: CommandPacket) -> np.ndarray:
    """Extract the joint list of a version-2 command packet."""
    if packet.version != VERSION_JOINT_LIST:
        raise BadVersion("not a joint-list packet")
    count = int(packet.payload[:1].view("<u2")[0])
    if packet.payload.size != 4 + count:
        raise BadLength(f"joint list count {count} does not match payload size {packet.payload.size}")
    return packet.payload[4 : 4 + count].astype(float)


def encode(packet: CommandPacket) -> bytes:
    """Serialize a packet; the trailing CRC covers every preceding byte."""
    payload = packet.payload.tobytes()
    head = HEADER.pack(MAGIC, packet.version, packet.ptype, packet.seq & 0xFFFFFFFF, len(payload))
    body = head + payload
    return body + struct.pack("<I", zlib.crc32(body))


def decode(buf: bytes) -> CommandPacket:
    """Parse and verify one frame.

    CRC is checked first over the whole buffer, so any single corrupted bit
    anywhere in the frame raises BadCrc. Magic/version/length checks follow
    and only fire on frames that were validly checksummed.
    """
    if len(buf) < HEADER.size + CRC_SIZE:
        raise BadLength(f"frame too short: {len(buf)} bytes")
    (stored_crc,) = struct.unpack_from("<I", buf, len(buf) - CRC_SIZE)
    if zlib.crc32(buf[:-CRC_SIZE]) != stored_crc:
        raise BadCrc("checksum mismatch")
    magic, version, ptype, seq, payload_len = HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version not in SUPPORTED_VERSIONS:
        raise BadVersion(f"unsupported version {version}")
    if len(buf) != HEADER.size + payload_len + CRC_SIZE:
        raise BadLength(f"declared payload {payload_len} does not match frame size {len(buf)}")
    if version == VERSION_FIXED and ptype in (TYPE_COMMAND, TYPE_STATE) and payload_len != FIXED_PAYLOAD_BYTES:
        raise BadLength(f"version-1 command/state payload must be {FIXED_PAYLOAD_BYTES} bytes")
    if payload_len % 4 != 0:
        raise BadLength(f"payload length {payload_len} is not a multiple of 4")
    payload = np.frombuffer(buf, dtype="<f4", count=payload_len // 4, offset=HEADER.size).copy()
    return CommandPacket(ptype=ptype, seq=seq, payload=payload, version=version)
