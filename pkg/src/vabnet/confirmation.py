"""Per-original-message confirmation graphs.

Each original message owns a DAG whose nodes are vehicle keys and whose
directed edges (confirmer -> confirmed sender) record one confirmation.
Recording rejects anything that would close a cycle, leaving the graph
untouched, and deduplicates repeated confirmations from the same
confirmer of the same sender so a single actor cannot inflate confidence.

Depth is 0 for the original and parent depth + 1 for each nested
confirmation. Confidence sums a per-confirmation contribution over all
counted confirmations: 1/(depth+1) for the harmonic function, 1/2^depth
for the geometric one. Acceptance compares confidence to a threshold.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum

PacketIdentity = tuple[bytes, int]  # (sender public key, packet id)


class ConfidenceFunction(Enum):
    HARMONIC = "harmonic"
    GEOMETRIC = "geometric"

    def contribution(self, depth: int) -> float:
        if self is ConfidenceFunction.HARMONIC:
            return 1.0 / (depth + 1)
        return 0.5 ** depth


@dataclass(frozen=True)
class AcceptancePolicy:
    threshold: float = 1.0
    max_depth: int | None = None

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")


class RecordStatus(Enum):
    ACCEPTED = "Accepted"
    CYCLE = "Cycle"
    UNKNOWN_TARGET = "UnknownTarget"
    DEPTH_CAP = "DepthCap"
    DUPLICATE = "DuplicateConfirmation"


@dataclass(slots=True)
class RecordOutcome:
    status: RecordStatus
    depth: int | None = None

    @property
    def accepted(self) -> bool:
        return self.status is RecordStatus.ACCEPTED


class ConfirmationGraph:
    def __init__(self, origin: PacketIdentity):
        self.origin = origin
        self._depths: dict[PacketIdentity, int] = {origin: 0}
        self._edges: set[tuple[bytes, bytes]] = set()
        # confirmer key -> set of confirmed-sender keys it has edges to
        self._succ: dict[bytes, set[bytes]] = {}
        self._counted_depths: list[int] = []
        self._confidence: dict[ConfidenceFunction, float] = {
            f: 0.0 for f in ConfidenceFunction}

    def known(self, identity: PacketIdentity) -> bool:
        return identity in self._depths

    def depth(self, identity: PacketIdentity) -> int:
        if identity not in self._depths:
            raise KeyError(f"unknown packet {identity[1]} in graph")
        return self._depths[identity]

    @property
    def nodes(self) -> set[bytes]:
        keys = {self.origin[0]}
        for a, b in self._edges:
            keys.add(a)
            keys.add(b)
        return keys

    @property
    def edges(self) -> set[tuple[bytes, bytes]]:
        return set(self._edges)

    @property
    def counted_depths(self) -> tuple[int, ...]:
        return tuple(self._counted_depths)

    def _reaches(self, start: bytes, goal: bytes) -> bool:
        if start == goal:
            return True
        queue = deque((start,))
        visited = {start}
        while queue:
            for nxt in self._succ.get(queue.popleft(), ()):
                if nxt == goal:
                    return True
                if nxt not in visited:
                    visited.add(nxt)
                    queue.append(nxt)
        return False

    def record_confirmation(self, confirmation: PacketIdentity,
                            confirmed: PacketIdentity, *,
                            counted: bool = True,
                            max_depth: int | None = None) -> RecordOutcome:
        """Try to add one confirmation edge; any rejection leaves the graph
        bit-identical to its pre-call state."""
        confirmer = confirmation[0]
        parent_depth = self._depths.get(confirmed)
        if parent_depth is None:
            return RecordOutcome(RecordStatus.UNKNOWN_TARGET)
        confirmed_sender = confirmed[0]
        if confirmation in self._depths or (confirmer, confirmed_sender) in self._edges:
            return RecordOutcome(RecordStatus.DUPLICATE)
        depth = parent_depth + 1
        if max_depth is not None and depth > max_depth:
            return RecordOutcome(RecordStatus.DEPTH_CAP)
        if self._reaches(confirmed_sender, confirmer):
            return RecordOutcome(RecordStatus.CYCLE)
        self._depths[confirmation] = depth
        self._edges.add((confirmer, confirmed_sender))
        self._succ.setdefault(confirmer, set()).add(confirmed_sender)
        if counted:
            self._counted_depths.append(depth)
            for f in ConfidenceFunction:
                self._confidence[f] += f.contribution(depth)
        return RecordOutcome(RecordStatus.ACCEPTED, depth)

    def confidence(self, f: ConfidenceFunction) -> float:
        return self._confidence[f]

    def is_accepted(self, f: ConfidenceFunction, policy: AcceptancePolicy) -> bool:
        return self._confidence[f] >= policy.threshold
