"""Bit-exact codecs for the two packet types.

Broadcast packets carry a fixed 109-byte header followed by an arbitrary
payload. Confirmation packets carry a fixed 113-byte header (the broadcast
header plus the confirmed packet id) followed by 40 bytes of confirmation
metadata: the confirmed sender's public key and the relative position of
the original sender as centimeter fixed-point east/north offsets.

All integers are big-endian. Signatures cover every field except the
signature itself, in encoding order. See WIRE.md for worked hex dumps.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

BROADCAST_TYPE = 0x01
CONFIRMATION_TYPE = 0x02

BROADCAST_HEADER_LEN = 109
CONFIRMATION_HEADER_LEN = 113
CONFIRMATION_METADATA_LEN = 40
CONFIRMATION_PACKET_LEN = CONFIRMATION_HEADER_LEN + CONFIRMATION_METADATA_LEN

_HEADER = struct.Struct(">BIQ32s64s")          # type, id, timestamp, key, signature
_SIGNED_PREFIX = struct.Struct(">BIQ32s")      # header minus the signature
_CONF_TAIL = struct.Struct(">I32sii")          # confirmed id, confirmed key, east, north

_U32_MAX = 2**32 - 1
_U64_MAX = 2**64 - 1
_I32_MIN, _I32_MAX = -(2**31), 2**31 - 1


class WireError(ValueError):
    """Base class for codec failures."""


class TruncatedError(WireError):
    """Input shorter than the packet's fixed layout requires."""


class UnknownPacketTypeError(WireError):
    """First byte is not a known packet type tag."""


class FieldWidthError(WireError):
    """A field value does not fit its declared width."""


def _check_widths(packet_id, timestamp_ms, sender_public_key, signature):
    if not 0 <= packet_id <= _U32_MAX:
        raise FieldWidthError(f"packet_id out of range: {packet_id}")
    if not 0 <= timestamp_ms <= _U64_MAX:
        raise FieldWidthError(f"timestamp_ms out of range: {timestamp_ms}")
    if len(sender_public_key) != 32:
        raise FieldWidthError("sender_public_key must be 32 bytes")
    if len(signature) != 64:
        raise FieldWidthError("signature must be 64 bytes")


@dataclass(slots=True)
class BroadcastPacket:
    packet_id: int
    timestamp_ms: int
    sender_public_key: bytes
    signature: bytes
    payload: bytes = b""

    def __post_init__(self):
        _check_widths(self.packet_id, self.timestamp_ms,
                      self.sender_public_key, self.signature)

    @property
    def identity(self) -> tuple[bytes, int]:
        return (self.sender_public_key, self.packet_id)


@dataclass(slots=True)
class ConfirmationPacket:
    packet_id: int
    timestamp_ms: int
    sender_public_key: bytes
    signature: bytes
    confirmed_packet_id: int
    confirmed_sender_public_key: bytes
    relative_east_cm: int
    relative_north_cm: int

    def __post_init__(self):
        _check_widths(self.packet_id, self.timestamp_ms,
                      self.sender_public_key, self.signature)
        if not 0 <= self.confirmed_packet_id <= _U32_MAX:
            raise FieldWidthError("confirmed_packet_id out of range")
        if len(self.confirmed_sender_public_key) != 32:
            raise FieldWidthError("confirmed_sender_public_key must be 32 bytes")
        for v in (self.relative_east_cm, self.relative_north_cm):
            if not _I32_MIN <= v <= _I32_MAX:
                raise FieldWidthError(f"relative position out of range: {v}")

    @property
    def identity(self) -> tuple[bytes, int]:
        return (self.sender_public_key, self.packet_id)

    @property
    def confirmed_identity(self) -> tuple[bytes, int]:
        return (self.confirmed_sender_public_key, self.confirmed_packet_id)


Packet = BroadcastPacket | ConfirmationPacket


def signed_region(p: Packet) -> bytes:
    """The exact byte string a packet's signature is computed over."""
    if isinstance(p, BroadcastPacket):
        return _SIGNED_PREFIX.pack(BROADCAST_TYPE, p.packet_id, p.timestamp_ms,
                                   p.sender_public_key) + p.payload
    return (_SIGNED_PREFIX.pack(CONFIRMATION_TYPE, p.packet_id, p.timestamp_ms,
                                p.sender_public_key)
            + _CONF_TAIL.pack(p.confirmed_packet_id, p.confirmed_sender_public_key,
                              p.relative_east_cm, p.relative_north_cm))


def encode_broadcast(p: BroadcastPacket) -> bytes:
    return _HEADER.pack(BROADCAST_TYPE, p.packet_id, p.timestamp_ms,
                        p.sender_public_key, p.signature) + p.payload


def decode_broadcast(data: bytes) -> BroadcastPacket:
    if len(data) < BROADCAST_HEADER_LEN:
        raise TruncatedError(
            f"broadcast packet needs {BROADCAST_HEADER_LEN} bytes, got {len(data)}")
    ptype, packet_id, timestamp_ms, key, sig = _HEADER.unpack_from(data)
    if ptype != BROADCAST_TYPE:
        raise UnknownPacketTypeError(f"expected type 0x01, got 0x{ptype:02x}")
    return BroadcastPacket(packet_id, timestamp_ms, key, sig,
                           data[BROADCAST_HEADER_LEN:])


def encode_confirmation(p: ConfirmationPacket) -> bytes:
    return (_HEADER.pack(CONFIRMATION_TYPE, p.packet_id, p.timestamp_ms,
                         p.sender_public_key, p.signature)
            + _CONF_TAIL.pack(p.confirmed_packet_id, p.confirmed_sender_public_key,
                              p.relative_east_cm, p.relative_north_cm))


def decode_confirmation(data: bytes) -> ConfirmationPacket:
    if len(data) < CONFIRMATION_PACKET_LEN:
        raise TruncatedError(
            f"confirmation packet needs {CONFIRMATION_PACKET_LEN} bytes, got {len(data)}")
    if len(data) > CONFIRMATION_PACKET_LEN:
        raise WireError(f"unexpected trailing bytes: {len(data) - CONFIRMATION_PACKET_LEN}")
    ptype, packet_id, timestamp_ms, key, sig = _HEADER.unpack_from(data)
    if ptype != CONFIRMATION_TYPE:
        raise UnknownPacketTypeError(f"expected type 0x02, got 0x{ptype:02x}")
    confirmed_id, confirmed_key, east, north = _CONF_TAIL.unpack_from(
        data, CONFIRMATION_HEADER_LEN - 4)
    return ConfirmationPacket(packet_id, timestamp_ms, key, sig,
                              confirmed_id, confirmed_key, east, north)


def encode_packet(p: Packet) -> bytes:
    if isinstance(p, BroadcastPacket):
        return encode_broadcast(p)
    return encode_confirmation(p)


def decode_packet(data: bytes) -> Packet:
    """Route on the leading type byte and decode."""
    if not data:
        raise TruncatedError("empty input")
    if data[0] == BROADCAST_TYPE:
        return decode_broadcast(data)
    if data[0] == CONFIRMATION_TYPE:
        return decode_confirmation(data)
    raise UnknownPacketTypeError(f"unknown packet type 0x{data[0]:02x}")
