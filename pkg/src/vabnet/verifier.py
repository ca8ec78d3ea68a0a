"""Incoming-packet verification checklist.

Checks run in a fixed order and the first failure wins, so a packet that
is both a duplicate and stale is always reported as a duplicate:

    duplicate -> expired -> too new -> own packet -> sender not sensed
    -> bad signature

The expiry window is symmetric (too old or too new by more than the
window) to tolerate two-sided clock skew. The dedup store retains entries
for twice the window so an in-window replay is always caught as a
duplicate and an out-of-window replay is already expired.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import crypto
from .pool import Position, PublicKeyPool
from .wire import Packet, signed_region

DEFAULT_WINDOW_MS = 5_000.0


class RejectReason(Enum):
    DUPLICATE = "Duplicate"
    EXPIRED = "Expired"
    TOO_NEW = "TooNew"
    OWN_PACKET = "OwnPacket"
    SENDER_NOT_SENSED = "SenderNotSensed"
    BAD_SIGNATURE = "BadSignature"
    MALFORMED = "Malformed"


@dataclass(slots=True)
class Verdict:
    verified: bool
    reason: RejectReason | None = None
    sender_position: Position | None = None

    @classmethod
    def ok(cls, position: Position) -> "Verdict":
        return cls(True, None, position)

    @classmethod
    def rejected(cls, reason: RejectReason) -> "Verdict":
        return cls(False, reason)


class DedupStore:
    """Seen packet identities with insertion times, pruned past retention."""

    def __init__(self, retention_ms: float = 2 * DEFAULT_WINDOW_MS):
        if retention_ms <= 0:
            raise ValueError("retention_ms must be positive")
        self.retention_ms = retention_ms
        self._seen: dict[tuple[bytes, int], float] = {}

    def __len__(self) -> int:
        return len(self._seen)

    def record(self, sender_key: bytes, packet_id: int, now_ms: float) -> None:
        self._seen[(sender_key, packet_id)] = now_ms

    def seen(self, sender_key: bytes, packet_id: int) -> bool:
        return (sender_key, packet_id) in self._seen

    def prune(self, now_ms: float) -> int:
        stale = [k for k, t in self._seen.items()
                 if now_ms - t > self.retention_ms]
        for k in stale:
            del self._seen[k]
        return len(stale)


def check(packet: Packet, now_ms: float, pool: PublicKeyPool, dedup: DedupStore,
          own_key: bytes, window_ms: float = DEFAULT_WINDOW_MS) -> Verdict:
    """Run the checklist; on success record the packet id in the dedup store
    and attach the sender's sensed position."""
    sender = packet.sender_public_key
    if dedup.seen(sender, packet.packet_id):
        return Verdict.rejected(RejectReason.DUPLICATE)
    age_ms = now_ms - packet.timestamp_ms
    if age_ms > window_ms:
        return Verdict.rejected(RejectReason.EXPIRED)
    if -age_ms > window_ms:
        return Verdict.rejected(RejectReason.TOO_NEW)
    if sender == own_key:
        return Verdict.rejected(RejectReason.OWN_PACKET)
    entry = pool.lookup(sender, now_ms)
    if entry is None:
        return Verdict.rejected(RejectReason.SENDER_NOT_SENSED)
    if not crypto.verify(sender, signed_region(packet), packet.signature):
        return Verdict.rejected(RejectReason.BAD_SIGNATURE)
    dedup.record(sender, packet.packet_id, now_ms)
    return Verdict.ok(entry.position)
