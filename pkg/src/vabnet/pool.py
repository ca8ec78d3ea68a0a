"""Public key pool: a TTL cache of visually sensed keys with positions.

Each node owns one pool; sensing inserts entries, the verifier looks them
up. Eviction is lazy on lookup plus an explicit sweep so a deterministic
simulation controls exactly when entries disappear.
"""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_TTL_MS = 60_000.0

Position = tuple[float, float]


@dataclass(slots=True)
class PkpEntry:
    public_key: bytes
    position: Position
    vehicle_signature: bytes
    observed_at_ms: float


class PublicKeyPool:
    """At most one entry per key; expired entries are never returned."""

    def __init__(self, ttl_ms: float = DEFAULT_TTL_MS):
        if ttl_ms <= 0:
            raise ValueError("ttl_ms must be positive")
        self.ttl_ms = ttl_ms
        self._entries: dict[bytes, PkpEntry] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def observe(self, key: bytes, position: Position,
                vehicle_signature: bytes, now_ms: float) -> None:
        """Upsert an entry, refreshing its position and observation time."""
        if len(key) != 32:
            raise ValueError(f"public key must be 32 bytes, got {len(key)}")
        entry = self._entries.get(key)
        if entry is None:
            self._entries[key] = PkpEntry(key, position, vehicle_signature, now_ms)
        else:
            entry.position = position
            entry.vehicle_signature = vehicle_signature
            entry.observed_at_ms = now_ms

    def lookup(self, key: bytes, now_ms: float) -> PkpEntry | None:
        entry = self._entries.get(key)
        if entry is None:
            return None
        if now_ms - entry.observed_at_ms > self.ttl_ms:
            del self._entries[key]
            return None
        return entry

    def localize(self, key: bytes, now_ms: float) -> Position | None:
        entry = self.lookup(key, now_ms)
        return None if entry is None else entry.position

    def remove(self, key: bytes) -> None:
        self._entries.pop(key, None)

    def evict_expired(self, now_ms: float) -> int:
        expired = [k for k, e in self._entries.items()
                   if now_ms - e.observed_at_ms > self.ttl_ms]
        for k in expired:
            del self._entries[k]
        return len(expired)
