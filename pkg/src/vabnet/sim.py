"""Deterministic discrete-event simulation of a small VANET.

Nodes run the full protocol stack; the network is replaced by a seeded
latency model over one of three propagation modes:

- global: every transmission reaches every other node, mirroring a
  pub/sub broker deployment. The default experiment mode.
- adjacency: radio reaches visibility-graph neighbors only.
- flooding: radio reaches graph neighbors and receivers relay the raw
  bytes up to a hop budget.

Beacon sensing is modeled by the visibility graph: each node's key pool
is pre-seeded with its neighbors and refreshed every virtual second, so
neighbor entries never expire during a run.

Virtual time drives the protocol; the wall-clock cost of each
verification call is measured on the side and never enters the event
log, so logs and metrics stay byte-reproducible for a fixed seed.
"""

from __future__ import annotations

import hashlib
import heapq
import random
import time
from collections import Counter
from dataclasses import dataclass, field

from . import wire
from .confirmation import ConfidenceFunction
from .crypto import generate_keypair
from .graphs import VisibilityGraph
from .node import (
    BlacklistedSender,
    ConfirmationEmitted,
    DirectVerified,
    Dropped,
    IndirectAccepted,
    Node,
    NodeConfig,
)

PROPAGATION_KINDS = ("adjacency", "global", "flooding")


@dataclass(frozen=True)
class PropagationModel:
    kind: str = "global"
    flood_ttl: int = 0
    base_latency_ms: float = 5.0
    jitter_ms: float = 5.0
    loss: float = 0.0

    def __post_init__(self):
        if self.kind not in PROPAGATION_KINDS:
            raise ValueError(f"unknown propagation kind {self.kind!r}")
        if self.kind == "flooding" and self.flood_ttl < 1:
            raise ValueError("flooding requires flood_ttl >= 1")
        if self.base_latency_ms < 0 or self.jitter_ms < 0:
            raise ValueError("latencies must be non-negative")
        if not 0.0 <= self.loss < 1.0:
            raise ValueError("loss must be in [0, 1)")


@dataclass(frozen=True)
class LoadProfile:
    packets_per_node: int
    window_ms: float = 60_000.0

    def __post_init__(self):
        if self.packets_per_node < 1 or self.window_ms <= 0:
            raise ValueError("load must be positive")

    @classmethod
    def low(cls, window_ms: float = 60_000.0) -> "LoadProfile":
        return cls(5, window_ms)

    @classmethod
    def high(cls, window_ms: float = 60_000.0) -> "LoadProfile":
        return cls(60, window_ms)


@dataclass(frozen=True)
class ProtocolConfig:
    """Per-node protocol parameters shared by every vehicle in a run.

    Rate limits default high so lossless experiments measure propagation,
    not throttling; abuse scenarios set them explicitly.
    """

    replay_window_ms: float = 5_000.0
    pkp_ttl_ms: float = 60_000.0
    confidence_function: ConfidenceFunction = ConfidenceFunction.HARMONIC
    acceptance_threshold: float = 1.0
    max_confirmation_depth: int | None = None
    confirm_confirmations: bool = True
    rate_limit_per_s: float = 10_000.0
    rate_limit_burst: float = 20_000.0


@dataclass(slots=True)
class LogRecord:
    time_ms: float
    node: int
    kind: str
    fields: tuple[str, ...]

    def to_line(self) -> str:
        return "\t".join((f"{self.time_ms:.3f}", str(self.node), self.kind)
                         + self.fields)


class EventLog:
    """Time-ordered protocol and network records plus side measurements.

    Per-reception records are kept for original packets; confirmation
    verification and drop volume is aggregated into `counters` to keep
    high-load logs tractable. Wall-clock verification time lives outside
    the serialized records so files stay seed-reproducible.
    """

    def __init__(self, header: dict[str, str]):
        self.header = dict(header)
        self.records: list[LogRecord] = []
        self.counters: Counter[str] = Counter()
        self.verify_wall_ms_total = 0.0
        self.verify_wall_samples = 0

    def append(self, time_ms: float, node: int, kind: str, *fields) -> None:
        self.records.append(LogRecord(time_ms, node, kind,
                                      tuple(str(f) for f in fields)))

    def to_lines(self) -> list[str]:
        lines = [f"# {k}={v}" for k, v in sorted(self.header.items())]
        lines.extend(r.to_line() for r in self.records)
        return lines

    def write(self, path) -> None:
        with open(path, "w") as fh:
            for line in self.to_lines():
                fh.write(line + "\n")

    @property
    def mean_verify_wall_ms(self) -> float:
        if self.verify_wall_samples == 0:
            return 0.0
        return self.verify_wall_ms_total / self.verify_wall_samples


def _node_seed(run_seed: int, index: int) -> bytes:
    return hashlib.sha256(
        b"vabnet-node:%d:%d" % (run_seed, index)).digest()


def _vehicle_signature(index: int) -> bytes:
    return hashlib.sha256(b"vehicle-appearance:%d" % index).digest()


def run_simulation(graph: VisibilityGraph, propagation: PropagationModel,
                   load: LoadProfile, proto: ProtocolConfig = ProtocolConfig(),
                   seed: int = 0) -> EventLog:
    """Run one scenario to quiescence and return its event log."""
    rng = random.Random(seed)
    n = graph.n
    adjacency = graph.adjacency()
    nodes = []
    for i in range(n):
        cfg = NodeConfig(
            keypair=generate_keypair(_node_seed(seed, i)),
            position=graph.positions[i],
            replay_window_ms=proto.replay_window_ms,
            pkp_ttl_ms=proto.pkp_ttl_ms,
            confidence_function=proto.confidence_function,
            acceptance_threshold=proto.acceptance_threshold,
            max_confirmation_depth=proto.max_confirmation_depth,
            rate_limit_per_s=proto.rate_limit_per_s,
            rate_limit_burst=proto.rate_limit_burst,
            confirm_confirmations=proto.confirm_confirmations,
        )
        nodes.append(Node(cfg))
    key_to_index = {node.public_key: i for i, node in enumerate(nodes)}

    log = EventLog({
        "graph": graph.name, "nodes": str(n),
        "propagation": propagation.kind, "flood_ttl": str(propagation.flood_ttl),
        "base_latency_ms": f"{propagation.base_latency_ms:g}",
        "jitter_ms": f"{propagation.jitter_ms:g}",
        "loss": f"{propagation.loss:g}",
        "packets_per_node": str(load.packets_per_node),
        "window_ms": f"{load.window_ms:g}",
        "confidence": proto.confidence_function.value,
        "threshold": f"{proto.acceptance_threshold:g}",
        "max_depth": str(proto.max_confirmation_depth),
        "confirm_confirmations": str(proto.confirm_confirmations),
        "seed": str(seed),
    })

    originals: set[tuple[bytes, int]] = set()

    def ident(identity: tuple[bytes, int]) -> tuple[int, int]:
        return key_to_index[identity[0]], identity[1]

    # Event queue: (time, sequence, action, args)
    heap: list[tuple] = []
    seq = 0

    def push(t: float, action: str, args: tuple) -> None:
        nonlocal seq
        heapq.heappush(heap, (t, seq, action, args))
        seq += 1

    for t in range(0, int(load.window_ms) + 1000, 1000):
        push(float(t), "refresh", ())
    for i in range(n):
        times = sorted(rng.uniform(0.0, load.window_ms)
                       for _ in range(load.packets_per_node))
        for k, t in enumerate(times):
            payload = b"event:%d:%d" % (i, k)
            push(t, "send_original", (i, payload))

    last_delivery: dict[tuple[int, int], float] = {}
    relayed: set[tuple[int, bytes]] = set()

    def receivers_for(sender_idx: int) -> tuple[int, ...]:
        if propagation.kind == "global":
            return tuple(j for j in range(n) if j != sender_idx)
        return adjacency[sender_idx]

    def transmit(sender_idx: int, data: bytes, packet, now: float,
                 ttl: int | None) -> None:
        is_original = (isinstance(packet, wire.BroadcastPacket)
                       and packet.identity in originals)
        if is_original:
            o_node, o_pid = ident(packet.identity)
            log.append(now, sender_idx, "NET_SEND", o_node, o_pid)
        for r in receivers_for(sender_idx):
            if propagation.loss and rng.random() < propagation.loss:
                continue
            delay = propagation.base_latency_ms
            if propagation.jitter_ms:
                delay += rng.uniform(0.0, propagation.jitter_ms)
            t = now + delay
            prev = last_delivery.get((sender_idx, r))
            if prev is not None and t <= prev:
                t = prev + 1e-6  # FIFO per (sender, receiver) pair
            last_delivery[(sender_idx, r)] = t
            push(t, "deliver", (r, data, packet, ttl))

    def deliver(receiver: int, data: bytes, packet, now: float,
                ttl: int | None) -> None:
        node = nodes[receiver]
        if (isinstance(packet, wire.BroadcastPacket)
                and packet.identity in originals):
            o_node, o_pid = ident(packet.identity)
            log.append(now, receiver, "NET_DELIVER", o_node, o_pid)
        t0 = time.perf_counter()
        events, out = node.handle_incoming(data, now, packet=packet)
        log.verify_wall_ms_total += (time.perf_counter() - t0) * 1000.0
        log.verify_wall_samples += 1
        for ev in events:
            _log_event(log, receiver, ev, now, originals, ident)
        for out_data in out:
            transmit(receiver, out_data, wire.decode_packet(out_data), now,
                     propagation.flood_ttl or None)
        if (propagation.kind == "flooding" and ttl is not None and ttl > 1
                and (receiver, data) not in relayed):
            relayed.add((receiver, data))
            transmit(receiver, data, packet, now, ttl - 1)

    # Initial sensing before any traffic.
    for i, node in enumerate(nodes):
        for j in adjacency[i]:
            node.observe_vab(nodes[j].public_key, graph.positions[j],
                             _vehicle_signature(j), 0.0)

    while heap:
        now, _, action, args = heapq.heappop(heap)
        if action == "refresh":
            for i, node in enumerate(nodes):
                for j in adjacency[i]:
                    node.observe_vab(nodes[j].public_key, graph.positions[j],
                                     _vehicle_signature(j), now)
                node.sweep(now)
        elif action == "send_original":
            i, payload = args
            packet, data = nodes[i].broadcast(payload, now)
            originals.add(packet.identity)
            log.append(now, i, "SENT", packet.packet_id, len(payload))
            transmit(i, data, packet, now, propagation.flood_ttl or None)
        elif action == "deliver":
            receiver, data, packet, ttl = args
            deliver(receiver, data, packet, now, ttl)
    return log


def _log_event(log: EventLog, node_idx: int, ev, now: float,
               originals, ident) -> None:
    if isinstance(ev, DirectVerified):
        if ev.packet_kind == "broadcast" and ev.origin in originals:
            o_node, o_pid = ident(ev.origin)
            log.append(now, node_idx, "DIRECT_VERIFIED", o_node, o_pid)
        else:
            log.counters["verified_confirmations"] += 1
    elif isinstance(ev, IndirectAccepted):
        o_node, o_pid = ident(ev.origin)
        pos = ev.estimated_position
        log.append(now, node_idx, "INDIRECT_ACCEPTED", o_node, o_pid,
                   f"{ev.confidence:.6f}",
                   "-" if pos is None else f"{pos[0]:.2f}",
                   "-" if pos is None else f"{pos[1]:.2f}",
                   ev.hop_count, ev.max_contributing_depth)
    elif isinstance(ev, ConfirmationEmitted):
        t_node, t_pid = ident(ev.target)
        log.append(now, node_idx, "CONFIRMATION_EMITTED", t_node, t_pid, ev.depth)
    elif isinstance(ev, BlacklistedSender):
        log.append(now, node_idx, "BLACKLISTED", ident((ev.sender_key, 0))[0])
    elif isinstance(ev, Dropped):
        log.counters[f"dropped_{ev.reason}"] += 1
