"""Connectivity and transmission model.

Links follow the unit-disk rule: two nodes hear each other iff their distance
is within the configured range (boundary inclusive).  Transmission is an ideal
MAC: every sender owns a FIFO queue draining at the configured bandwidth, with
no collisions or contention.  Congestion shows up as queueing delay and
queue-full drops.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Optional

BROADCAST = None  # frame dst marker

DELIVERED = "delivered"
DROP_NO_LINK = "dropped-no-link"
DROP_QUEUE_FULL = "dropped-queue-full"


@dataclass(frozen=True)
class RadioConfig:
    range: float = 250.0  # unit-disk radius, meters
    bandwidth: float = 2_000_000.0  # bits/s
    per_node_queue_capacity: int = 50  # waiting frames per sender
    per_hop_processing_delay: float = 0.001  # seconds

    def __post_init__(self):
        if self.range <= 0 or self.bandwidth <= 0:
            raise ValueError("range and bandwidth must be > 0")
        if self.per_node_queue_capacity < 1:
            raise ValueError("queue capacity must be >= 1")


@dataclass(slots=True)
class Frame:
    payload: Any
    size: int  # bytes
    src: int
    dst: Optional[int]  # None broadcasts to all current neighbors

    def __post_init__(self):
        if self.size <= 0:
            raise ValueError("frame size must be > 0")


@dataclass(slots=True)
class TransmitResult:
    status: str  # DELIVERED / DROP_NO_LINK / DROP_QUEUE_FULL
    deliver_at: float = 0.0
    recipients: tuple = ()


@dataclass
class RadioStats:
    transmitted: int = 0
    delivered: int = 0
    dropped_no_link: int = 0
    dropped_queue_full: int = 0


def neighbors(positions: list[tuple[float, float]], cfg: RadioConfig) -> dict[int, set[int]]:
    """Symmetric, irreflexive adjacency over a position snapshot."""
    n = len(positions)
    adj: dict[int, set[int]] = {i: set() for i in range(n)}
    r2 = cfg.range * cfg.range
    for i in range(n):
        xi, yi = positions[i]
        for j in range(i + 1, n):
            dx = positions[j][0] - xi
            dy = positions[j][1] - yi
            if dx * dx + dy * dy <= r2:
                adj[i].add(j)
                adj[j].add(i)
    return adj


class Radio:
    """Per-run transmission state: one FIFO queue per sender.

    position_of(node, t) supplies geometry; adjacency is evaluated at the
    moment transmit() is called, before any queueing.
    """

    def __init__(self, cfg: RadioConfig, n_nodes: int, position_of):
        self.cfg = cfg
        self.n_nodes = n_nodes
        self.position_of = position_of
        self._busy_until = [0.0] * n_nodes
        self._pending_starts: list[deque] = [deque() for _ in range(n_nodes)]
        self.stats = RadioStats()

    def link_up(self, a: int, b: int, t: float) -> bool:
        xa, ya = self.position_of(a, t)
        xb, yb = self.position_of(b, t)
        return math.hypot(xb - xa, yb - ya) <= self.cfg.range

    def neighbors_of(self, node: int, t: float) -> list[int]:
        x, y = self.position_of(node, t)
        r = self.cfg.range
        out = []
        for other in range(self.n_nodes):
            if other == node:
                continue
            ox, oy = self.position_of(other, t)
            if math.hypot(ox - x, oy - y) <= r:
                out.append(other)
        return out

    def transmit(self, frame: Frame, at: float) -> TransmitResult:
        """Queue a frame at the sender; compute delivery time and recipients.

        Delivery time is at + queueing + serialization + processing delay.
        Unicast to a node out of range at send time is a link-level drop (the
        routing layer turns that into broken-link handling).
        """
        self.stats.transmitted += 1
        if frame.dst is not None:
            recipients = (frame.dst,) if self.link_up(frame.src, frame.dst, at) else ()
        else:
            recipients = tuple(self.neighbors_of(frame.src, at))
        if not recipients:
            self.stats.dropped_no_link += 1
            return TransmitResult(DROP_NO_LINK)

        src = frame.src
        starts = self._pending_starts[src]
        while starts and starts[0] <= at:
            starts.popleft()
        if len(starts) >= self.cfg.per_node_queue_capacity:
            self.stats.dropped_queue_full += 1
            return TransmitResult(DROP_QUEUE_FULL)

        start = max(at, self._busy_until[src])
        tx_time = frame.size * 8.0 / self.cfg.bandwidth
        self._busy_until[src] = start + tx_time
        if start > at:
            starts.append(start)
        self.stats.delivered += 1
        deliver_at = start + tx_time + self.cfg.per_hop_processing_delay
        return TransmitResult(DELIVERED, deliver_at, recipients)
