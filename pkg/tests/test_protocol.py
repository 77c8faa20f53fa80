import struct

import numpy as np
import pytest

from teleopsim import protocol
from teleopsim.errors import BadCrc, BadLength, BadMagic, BadVersion, ShapeError


def crc32_reference(data: bytes) -> int:
    """Independent bitwise CRC-32 (IEEE 802.3, reflected, init/xorout all-ones)."""
    crc = 0xFFFFFFFF
    for b in data:
        crc ^= b
        for _ in range(8):
            crc = (crc >> 1) ^ (0xEDB88320 if crc & 1 else 0)
    return crc ^ 0xFFFFFFFF


# CRC of the fixed reference frame (zero command, seq 0), computed once with
# the bitwise implementation above and pinned.
GOLDEN_ZERO_COMMAND_CRC = 0x5BE66C2B


def random_packet(rng) -> protocol.CommandPacket:
    ptype = int(rng.choice([protocol.TYPE_COMMAND, protocol.TYPE_STATE]))
    bits = rng.integers(0, 2**32, size=32, dtype=np.uint32)
    payload = bits.view("<f4")
    return protocol.CommandPacket(ptype=ptype, seq=int(rng.integers(0, 2**32)), payload=payload)


class TestRoundTrip:
    def test_command_payload_is_128_bytes(self):
        pkt = protocol.make_command(seq=1, vx=0.5, wyaw=-0.1, height=0.7)
        assert pkt.payload.nbytes == 128
        buf = protocol.encode(pkt)
        assert len(buf) == 10 + 128 + 4

    def test_fuzzed_round_trip(self):
        rng = np.random.default_rng(0)
        for _ in range(2000):
            pkt = random_packet(rng)
            assert protocol.decode(protocol.encode(pkt)) == pkt

    def test_heartbeat_round_trip(self):
        hb = protocol.make_heartbeat(seq=9)
        out = protocol.decode(protocol.encode(hb))
        assert out == hb and out.payload.size == 0

    def test_named_fields(self):
        arm = np.linspace(-1, 1, 14)
        hand = np.linspace(0, 1, 14)
        pkt = protocol.make_command(seq=3, vx=0.8, wyaw=-0.2, height=0.6, arm=arm, hand=hand)
        out = protocol.decode(protocol.encode(pkt))
        assert out.vx == pytest.approx(0.8, rel=1e-6)
        assert out.wyaw == pytest.approx(-0.2, rel=1e-6)
        assert out.height == pytest.approx(0.6, rel=1e-6)
        assert np.allclose(out.arm_targets, arm, atol=1e-6)
        assert np.allclose(out.hand_targets, hand, atol=1e-6)
        assert out.payload[protocol.SLOT_RESERVED] == 0.0

    def test_joint_list_version(self):
        targets = np.linspace(-0.5, 0.5, 29)
        pkt = protocol.make_joint_list_command(seq=4, vx=0.1, wyaw=0.0, height=0.9, targets=targets)
        out = protocol.decode(protocol.encode(pkt))
        assert out.version == protocol.VERSION_JOINT_LIST
        assert np.allclose(protocol.joint_list_targets(out), targets, atol=1e-6)


class TestCrc:
    def reference_frame(self) -> bytes:
        return protocol.encode(protocol.make_command(seq=0))

    def test_golden_crc_constant(self):
        buf = self.reference_frame()
        (stored,) = struct.unpack("<I", buf[-4:])
        assert stored == GOLDEN_ZERO_COMMAND_CRC
        assert crc32_reference(buf[:-4]) == GOLDEN_ZERO_COMMAND_CRC

    def test_encoder_matches_reference_crc_on_random_frames(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            buf = protocol.encode(random_packet(rng))
            (stored,) = struct.unpack("<I", buf[-4:])
            assert stored == crc32_reference(buf[:-4])

    def test_every_single_bit_flip_detected(self):
        buf = bytearray(self.reference_frame())
        for byte_idx in range(len(buf)):
            for bit in range(8):
                corrupted = bytearray(buf)
                corrupted[byte_idx] ^= 1 << bit
                with pytest.raises(BadCrc):
                    protocol.decode(bytes(corrupted))


class TestDecodeErrors:
    def _reframe(self, body: bytes) -> bytes:
        import zlib

        return body + struct.pack("<I", zlib.crc32(body))

    def test_short_frame(self):
        with pytest.raises(BadLength):
            protocol.decode(b"\x48\x4d\x01")

    def test_bad_magic_with_valid_crc(self):
        body = struct.pack("<2sBBIH", b"XY", 1, 1, 0, 0)
        with pytest.raises(BadMagic):
            protocol.decode(self._reframe(body))

    def test_bad_version_with_valid_crc(self):
        body = struct.pack("<2sBBIH", b"HM", 9, 1, 0, 0)
        with pytest.raises(BadVersion):
            protocol.decode(self._reframe(body))

    def test_declared_length_mismatch_with_valid_crc(self):
        body = struct.pack("<2sBBIH", b"HM", 1, 3, 0, 64)  # claims 64, carries 0
        with pytest.raises(BadLength):
            protocol.decode(self._reframe(body))

    def test_version1_command_requires_128_byte_payload(self):
        body = struct.pack("<2sBBIH", b"HM", 1, 1, 0, 8) + bytes(8)
        with pytest.raises(BadLength):
            protocol.decode(self._reframe(body))


class TestConstruction:
    def test_wrong_payload_size_rejected(self):
        with pytest.raises(ShapeError):
            protocol.CommandPacket(ptype=protocol.TYPE_COMMAND, seq=0, payload=np.zeros(5, dtype="<f4"))

    def test_heartbeat_payload_must_be_empty(self):
        with pytest.raises(ShapeError):
            protocol.CommandPacket(ptype=protocol.TYPE_HEARTBEAT, seq=0, payload=np.zeros(1, dtype="<f4"))

    def test_too_many_targets_rejected(self):
        with pytest.raises(ShapeError):
            protocol.make_command(seq=0, arm=np.zeros(15))

    def test_unsupported_version_rejected(self):
        with pytest.raises(BadVersion):
            protocol.CommandPacket(ptype=1, seq=0, payload=np.zeros(32, dtype="<f4"), version=7)
