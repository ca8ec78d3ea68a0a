"""Per-vehicle protocol state machine.

A node signs and emits broadcasts, runs incoming packets through the
verification checklist, feeds confirmations to its confirmation graphs,
emits confirmations for packets it directly verified, rate-limits and
blacklists noisy senders, and runs point-to-point encrypted sessions.

A node is a single-owner state machine driven by an injected clock: every
method takes the current time, so the simulator supplies virtual time and
real deployments supply wall time. Given the same config and the same
(bytes, timestamp) input sequence, the emitted event list is identical
across runs.
"""

from __future__ import annotations

import os
import struct
from collections import deque
from dataclasses import dataclass, field

from . import crypto, wire
from .confirmation import (
    ConfidenceFunction,
    ConfirmationGraph,
    PacketIdentity,
    RecordStatus,
)
from .pool import Position, PublicKeyPool
from .verifier import DedupStore, RejectReason, Verdict, check
from .wire import BroadcastPacket, ConfirmationPacket, Packet

# ---------------------------------------------------------------------------
# Events

@dataclass(slots=True)
class Sent:
    packet_id: int
    payload_len: int


@dataclass(slots=True)
class DirectVerified:
    origin: PacketIdentity
    sender_position: Position
    t_receive_ms: float
    t_verified_ms: float
    packet_kind: str  # "broadcast" | "confirmation"


@dataclass(slots=True)
class IndirectAccepted:
    origin: PacketIdentity
    estimated_position: Position | None
    confidence: float
    hop_count: int
    max_contributing_depth: int


@dataclass(slots=True)
class ConfirmationEmitted:
    target: PacketIdentity
    depth: int


@dataclass(slots=True)
class Dropped:
    reason: str
    subject: PacketIdentity | None = None


@dataclass(slots=True)
class BlacklistedSender:
    sender_key: bytes


NodeEvent = Sent | DirectVerified | IndirectAccepted | ConfirmationEmitted | Dropped | BlacklistedSender


# ---------------------------------------------------------------------------
# Configuration

@dataclass
class NodeConfig:
    keypair: crypto.KeyPair
    position: Position = (0.0, 0.0)
    replay_window_ms: float = 5_000.0
    pkp_ttl_ms: float = 60_000.0
    confidence_function: ConfidenceFunction = ConfidenceFunction.HARMONIC
    acceptance_threshold: float = 1.0
    max_confirmation_depth: int | None = None
    rate_limit_per_s: float = 10.0
    rate_limit_burst: float = 20.0
    blacklist_strikes: int = 3
    blacklist_window_ms: float = 60_000.0
    confirm_confirmations: bool = True

    def __post_init__(self):
        for name in ("replay_window_ms", "pkp_ttl_ms", "rate_limit_per_s",
                     "rate_limit_burst", "blacklist_window_ms"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.acceptance_threshold <= 0:
            raise ValueError("acceptance_threshold must be positive")


# ---------------------------------------------------------------------------
# Point-to-point sessions

_HS_MAGIC = b"VABP2P1"
_HS_INIT = 0x01
_HS_RESP = 0x02
_HS_PAYLOAD_LEN = len(_HS_MAGIC) + 1 + 32 + 32


class P2PSessionError(Exception):
    pass


class P2PSession:
    """One encrypted channel; nonces are per-direction monotone counters."""

    def __init__(self, peer_identity_key: bytes, initiator: bool):
        self.peer_identity_key = peer_identity_key
        self.initiator = initiator
        self.key: bytes | None = None
        self._eph: crypto.KeyPair | None = None
        self._send_ctr = 0
        self._recv_ctr = 0

    @property
    def established(self) -> bool:
        return self.key is not None

    def _nonce(self, outgoing: bool, counter: int) -> bytes:
        direction = 0x00 if outgoing == self.initiator else 0x01
        return struct.pack(">B3xQ", direction, counter)

    def send(self, plaintext: bytes) -> bytes:
        if self.key is None:
            raise P2PSessionError("session not established")
        ctr = self._send_ctr
        self._send_ctr += 1
        sealed = crypto.seal(self.key, self._nonce(True, ctr), plaintext)
        return struct.pack(">Q", ctr) + sealed

    def recv(self, data: bytes) -> bytes:
        if self.key is None:
            raise P2PSessionError("session not established")
        if len(data) < 8:
            raise P2PSessionError("message too short")
        (ctr,) = struct.unpack_from(">Q", data)
        if ctr != self._recv_ctr:
            raise P2PSessionError(f"out-of-order counter {ctr}, expected {self._recv_ctr}")
        plaintext = crypto.open_sealed(self.key, self._nonce(False, ctr), data[8:])
        self._recv_ctr += 1
        return plaintext


# ---------------------------------------------------------------------------
# Rate limiting

class _TokenBucket:
    __slots__ = ("tokens", "last_ms", "strikes")

    def __init__(self, burst: float, now_ms: float):
        self.tokens = burst
        self.last_ms = now_ms
        self.strikes: deque[float] = deque()


# ---------------------------------------------------------------------------

class Node:
    def __init__(self, config: NodeConfig):
        self.config = config
        self.pool = PublicKeyPool(ttl_ms=config.pkp_ttl_ms)
        self.dedup = DedupStore(retention_ms=2 * config.replay_window_ms)
        self._next_packet_id = 0
        self._graphs: dict[PacketIdentity, ConfirmationGraph] = {}
        self._conf_origin: dict[PacketIdentity, PacketIdentity] = {}
        self._origin_estimates: dict[PacketIdentity, list[Position]] = {}
        self._pending_payloads: dict[PacketIdentity, tuple[bytes, float]] = {}
        self._indirect_done: set[PacketIdentity] = set()
        # confirmed identity -> buffered confirmations waiting for it
        self._pending_confs: dict[PacketIdentity, list[tuple]] = {}
        self._buckets: dict[bytes, _TokenBucket] = {}
        self._blacklist: set[bytes] = set()
        self._sessions: dict[bytes, P2PSession] = {}

    @property
    def public_key(self) -> bytes:
        return self.config.keypair.public_key

    # -- sensing ----------------------------------------------------------

    def observe_vab(self, key: bytes, position: Position,
                    vehicle_signature: bytes, now_ms: float) -> None:
        self.pool.observe(key, position, vehicle_signature, now_ms)

    def sweep(self, now_ms: float) -> None:
        """Periodic housekeeping: evict expired cache and buffer entries."""
        self.pool.evict_expired(now_ms)
        self.dedup.prune(now_ms)
        for target in list(self._pending_confs):
            kept = [b for b in self._pending_confs[target] if b[-1] >= now_ms]
            if kept:
                self._pending_confs[target] = kept
            else:
                del self._pending_confs[target]

    # -- sending ----------------------------------------------------------

    def _take_packet_id(self) -> int:
        pid = self._next_packet_id
        self._next_packet_id += 1
        return pid

    def broadcast(self, payload: bytes, now_ms: float) -> tuple[BroadcastPacket, bytes]:
        """Sign and encode an original message."""
        p = BroadcastPacket(self._take_packet_id(), int(now_ms),
                            self.public_key, bytes(64), payload)
        p.signature = crypto.sign(self.config.keypair, wire.signed_region(p))
        return p, wire.encode_broadcast(p)

    # -- receiving --------------------------------------------------------

    def handle_incoming(self, data: bytes, now_ms: float,
                        packet: Packet | None = None
                        ) -> tuple[list[NodeEvent], list[bytes]]:
        """Process one received byte string.

        Returns (events, outgoing byte strings). The caller may pass the
        already-decoded packet when it fans the same bytes out to many
        nodes; the decode is pure so this changes nothing observable.
        """
        events: list[NodeEvent] = []
        out: list[bytes] = []
        if packet is None:
            try:
                packet = wire.decode_packet(data)
            except wire.WireError:
                events.append(Dropped(RejectReason.MALFORMED.value))
                return events, out
        sender = packet.sender_public_key
        if sender != self.public_key and not self._admit(sender, now_ms, events):
            return events, out
        verdict = check(packet, now_ms, self.pool, self.dedup,
                        self.public_key, self.config.replay_window_ms)
        if isinstance(packet, BroadcastPacket):
            self._handle_broadcast(packet, verdict, now_ms, events, out)
        else:
            self._handle_confirmation(packet, verdict, now_ms, events, out)
        return events, out

    def _admit(self, sender: bytes, now_ms: float, events: list[NodeEvent]) -> bool:
        """Blacklist and token-bucket gate, before any signature work."""
        if sender in self._blacklist:
            events.append(Dropped("RateLimited"))
            return False
        cfg = self.config
        bucket = self._buckets.get(sender)
        if bucket is None:
            bucket = self._buckets[sender] = _TokenBucket(cfg.rate_limit_burst, now_ms)
        else:
            bucket.tokens = min(
                cfg.rate_limit_burst,
                bucket.tokens + (now_ms - bucket.last_ms) / 1000.0 * cfg.rate_limit_per_s)
            bucket.last_ms = now_ms
        if bucket.tokens >= 1.0:
            bucket.tokens -= 1.0
            return True
        bucket.strikes.append(now_ms)
        while bucket.strikes and now_ms - bucket.strikes[0] > cfg.blacklist_window_ms:
            bucket.strikes.popleft()
        events.append(Dropped("RateLimited"))
        if len(bucket.strikes) >= cfg.blacklist_strikes:
            self._blacklist.add(sender)
            events.append(BlacklistedSender(sender))
        return False

    # -- broadcast path ---------------------------------------------------

    def _handle_broadcast(self, packet: BroadcastPacket, verdict: Verdict,
                          now_ms: float, events, out) -> None:
        origin = packet.identity
        if verdict.verified:
            events.append(DirectVerified(origin, verdict.sender_position,
                                         now_ms, now_ms, "broadcast"))
            self._graph(origin)
            self._emit_confirmation(origin, origin, 0, now_ms, events, out)
            self._drain_pending(origin, now_ms, events, out)
            self._maybe_handshake(packet, now_ms, out)
            return
        events.append(Dropped(verdict.reason.value, origin))
        if verdict.reason is RejectReason.SENDER_NOT_SENSED:
            # Keep the payload: the packet may still be accepted indirectly
            # once enough confirmations accumulate. Only self-consistent
            # signatures are worth buffering.
            if crypto.verify(packet.sender_public_key,
                             wire.signed_region(packet), packet.signature):
                self._graph(origin)
                if origin not in self._indirect_done:
                    self._pending_payloads.setdefault(origin, (packet.payload, now_ms))
                self._drain_pending(origin, now_ms, events, out)
                self._check_indirect(origin, now_ms, events)

    # -- confirmation path ------------------------------------------------

    def _handle_confirmation(self, packet: ConfirmationPacket, verdict: Verdict,
                             now_ms: float, events, out) -> None:
        if verdict.verified:
            events.append(DirectVerified(packet.identity, verdict.sender_position,
                                         now_ms, now_ms, "confirmation"))
            self._ingest_confirmation(packet, verdict.sender_position,
                                      reconfirm=self.config.confirm_confirmations,
                                      now_ms=now_ms, events=events, out=out)
            return
        events.append(Dropped(verdict.reason.value, packet.identity))
        if verdict.reason is RejectReason.SENDER_NOT_SENSED:
            # An unsensed confirmer cannot be attested or localized, but its
            # self-consistent confirmation still contributes confidence.
            if crypto.verify(packet.sender_public_key,
                             wire.signed_region(packet), packet.signature):
                self._ingest_confirmation(packet, None, reconfirm=False,
                                          now_ms=now_ms, events=events, out=out)

    def _ingest_confirmation(self, packet: ConfirmationPacket,
                             confirmer_pos: Position | None, *,
                             reconfirm: bool, now_ms: float, events, out) -> None:
        target = packet.confirmed_identity
        origin = self._resolve_origin(target)
        if origin is None:
            # Network reordering can deliver a confirmation before its
            # target; buffer it for up to the replay window.
            self._pending_confs.setdefault(target, []).append(
                (packet, confirmer_pos, reconfirm,
                 now_ms + self.config.replay_window_ms))
            return
        graph = self._graph(origin)
        outcome = graph.record_confirmation(
            packet.identity, target,
            max_depth=self.config.max_confirmation_depth)
        if not outcome.accepted:
            events.append(Dropped(outcome.status.value, packet.identity))
            return
        self._conf_origin[packet.identity] = origin
        if confirmer_pos is not None:
            estimate = (confirmer_pos[0] + packet.relative_east_cm / 100.0,
                        confirmer_pos[1] + packet.relative_north_cm / 100.0)
            self._origin_estimates.setdefault(origin, []).append(estimate)
        if reconfirm:
            self._emit_confirmation(origin, packet.identity, outcome.depth,
                                    now_ms, events, out)
        self._drain_pending(packet.identity, now_ms, events, out)
        self._check_indirect(origin, now_ms, events)

    def _resolve_origin(self, target: PacketIdentity) -> PacketIdentity | None:
        if target in self._graphs:
            return target
        return self._conf_origin.get(target)

    def _drain_pending(self, target: PacketIdentity, now_ms: float, events, out) -> None:
        buffered = self._pending_confs.pop(target, None)
        if not buffered:
            return
        for packet, confirmer_pos, reconfirm, expires_ms in buffered:
            if expires_ms < now_ms:
                continue
            self._ingest_confirmation(packet, confirmer_pos, reconfirm=reconfirm,
                                      now_ms=now_ms, events=events, out=out)

    # -- confirmation emission --------------------------------------------

    def _graph(self, origin: PacketIdentity) -> ConfirmationGraph:
        graph = self._graphs.get(origin)
        if graph is None:
            graph = self._graphs[origin] = ConfirmationGraph(origin)
        return graph

    def _origin_position(self, origin: PacketIdentity, now_ms: float) -> Position | None:
        sensed = self.pool.localize(origin[0], now_ms)
        if sensed is not None:
            return sensed
        estimates = self._origin_estimates.get(origin)
        if not estimates:
            return None
        n = len(estimates)
        return (sum(e[0] for e in estimates) / n, sum(e[1] for e in estimates) / n)

    def _emit_confirmation(self, origin: PacketIdentity, target: PacketIdentity,
                           target_depth: int, now_ms: float, events, out) -> None:
        depth = target_depth + 1
        cap = self.config.max_confirmation_depth
        if cap is not None and depth > cap:
            return
        origin_pos = self._origin_position(origin, now_ms)
        if origin_pos is None:
            return
        graph = self._graph(origin)
        own = self.public_key
        pid = self._take_packet_id()
        # Our own confirmations enter the graph as known packets (so peers'
        # nested confirmations resolve) but never count toward our own
        # acceptance decision.
        outcome = graph.record_confirmation((own, pid), target,
                                            counted=False, max_depth=cap)
        if not outcome.accepted:
            return
        self._conf_origin[(own, pid)] = origin
        rel_east = round((origin_pos[0] - self.config.position[0]) * 100.0)
        rel_north = round((origin_pos[1] - self.config.position[1]) * 100.0)
        p = ConfirmationPacket(pid, int(now_ms), own, bytes(64),
                               target[1], target[0], rel_east, rel_north)
        p.signature = crypto.sign(self.config.keypair, wire.signed_region(p))
        events.append(ConfirmationEmitted(target, depth))
        out.append(wire.encode_confirmation(p))

    # -- indirect acceptance ----------------------------------------------

    def _check_indirect(self, origin: PacketIdentity, now_ms: float, events) -> None:
        if origin in self._indirect_done or origin not in self._pending_payloads:
            return
        graph = self._graphs[origin]
        confidence = graph.confidence(self.config.confidence_function)
        if confidence < self.config.acceptance_threshold:
            return
        depths = graph.counted_depths
        events.append(IndirectAccepted(
            origin, self._origin_position(origin, now_ms), confidence,
            1 + min(depths), max(depths)))
        self._indirect_done.add(origin)
        del self._pending_payloads[origin]

    # -- point-to-point ---------------------------------------------------

    def open_p2p_session(self, peer_key: bytes, now_ms: float,
                         eph_seed: bytes | None = None
                         ) -> tuple[P2PSession, list[bytes]]:
        """Start a handshake with a sensed peer.

        The ephemeral DH public key travels inside a signed broadcast
        packet, so the peer authenticates it like any other message.
        """
        if self.pool.lookup(peer_key, now_ms) is None:
            raise P2PSessionError("peer VAB not sensed")
        session = P2PSession(peer_key, initiator=True)
        session._eph = crypto.generate_dh_keypair(eph_seed or os.urandom(32))
        self._sessions[peer_key] = session
        payload = (_HS_MAGIC + bytes([_HS_INIT]) + peer_key
                   + session._eph.public_key)
        _, data = self.broadcast(payload, now_ms)
        return session, [data]

    def session_with(self, peer_key: bytes) -> P2PSession | None:
        return self._sessions.get(peer_key)

    def _maybe_handshake(self, packet: BroadcastPacket, now_ms: float, out) -> None:
        payload = packet.payload
        if len(payload) != _HS_PAYLOAD_LEN or not payload.startswith(_HS_MAGIC):
            return
        kind = payload[len(_HS_MAGIC)]
        target = payload[len(_HS_MAGIC) + 1:len(_HS_MAGIC) + 33]
        peer_eph = payload[len(_HS_MAGIC) + 33:]
        if target != self.public_key:
            return
        peer = packet.sender_public_key
        if kind == _HS_INIT:
            session = P2PSession(peer, initiator=False)
            eph = crypto.generate_dh_keypair(os.urandom(32))
            session.key = crypto.derive_shared_key(eph.private_key, peer_eph)
            self._sessions[peer] = session
            reply = _HS_MAGIC + bytes([_HS_RESP]) + peer + eph.public_key
            _, data = self.broadcast(reply, now_ms)
            out.append(data)
        elif kind == _HS_RESP:
            session = self._sessions.get(peer)
            if session is not None and session._eph is not None and not session.established:
                session.key = crypto.derive_shared_key(
                    session._eph.private_key, peer_eph)
