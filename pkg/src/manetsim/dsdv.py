"""Per-node DSDV state machine.

Every node keeps one sequence-numbered route per known destination and
advertises its full table periodically.  Sequence numbers originated by a
destination are even; a broken link bumps the dead route's number to the next
odd value, so fresher information always wins and transient loops die out.
Incremental (triggered) advertisements carry only recently changed routes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

UNREACHABLE = 255  # metric sentinel; orders above any real hop count
DATA_TTL = 32  # bounds packets caught in transient routing loops

UPDATE_HEADER_BYTES = 20
UPDATE_ENTRY_BYTES = 12


class ProtocolInvariantError(RuntimeError):
    """A table mutation violated sequence parity or monotonicity."""


@dataclass(frozen=True)
class DsdvConfig:
    periodic_interval: float = 15.0
    jitter: float = 1.0  # uniform desync added to each periodic tick
    pending_packet_buffer: int = 64  # packets buffered per node awaiting routes
    pending_timeout: float = 8.0

    def __post_init__(self):
        if self.periodic_interval <= 0:
            raise ValueError("periodic_interval must be > 0")
        if not 0 <= self.jitter < self.periodic_interval:
            raise ValueError("jitter must be in [0, periodic_interval)")
        if self.pending_packet_buffer < 1:
            raise ValueError("pending_packet_buffer must be >= 1")


@dataclass(frozen=True)
class RouteEntry:
    dest: int
    next_hop: int
    metric: int
    seq: int
    installed_at: float


@dataclass
class UpdateMessage:
    origin: int
    kind: str  # "full" or "incremental"
    entries: list  # of (dest, metric, seq)

    @property
    def size_bytes(self) -> int:
        return UPDATE_HEADER_BYTES + UPDATE_ENTRY_BYTES * len(self.entries)


def route_preferred(candidate: tuple[int, int], incumbent: tuple[int, int]) -> bool:
    """Newer sequence number wins; fewer hops breaks a sequence tie."""
    cand_metric, cand_seq = candidate
    inc_metric, inc_seq = incumbent
    return cand_seq > inc_seq or (cand_seq == inc_seq and cand_metric < inc_metric)


class DsdvNode:
    """Routing table plus the pending-packet buffer of one node.

    Table entries are stored as (next_hop, metric, seq, installed_at) tuples
    keyed by destination; handle_update runs hot (every received advertisement
    touches it), so the inner loop avoids object churn.
    """

    def __init__(self, node_id: int, cfg: DsdvConfig, now: float = 0.0):
        self.node_id = node_id
        self.cfg = cfg
        self.own_seq = 0
        self.routes: dict[int, tuple[int, int, int, float]] = {
            node_id: (node_id, 0, 0, now)
        }
        self.pending: deque = deque()  # (packet, enqueued_at)
        self.pending_advert: set[int] = set()  # dests to include in next triggered update
        self.malformed_entries = 0

    # -- table mutation -----------------------------------------------------

    def _install(self, dest: int, next_hop: int, metric: int, seq: int, now: float) -> None:
        if (metric == UNREACHABLE) != (seq % 2 == 1):
            raise ProtocolInvariantError(
                f"parity violated for dest {dest}: metric={metric} seq={seq}"
            )
        old = self.routes.get(dest)
        if old is not None and seq < old[2]:
            raise ProtocolInvariantError(
                f"sequence number regressed for dest {dest}: {old[2]} -> {seq}"
            )
        self.routes[dest] = (next_hop, metric, seq, now)

    def handle_update(self, from_: int, msg: UpdateMessage, now: float) -> set[int]:
        """Merge an advertisement heard from a direct neighbor.

        Returns the set of destinations whose entry changed.  Destinations
        whose metric (or reachability) changed are additionally queued for the
        next triggered advertisement; pure sequence-number refreshes ride the
        periodic dumps instead.
        """
        changed: set[int] = set()
        routes = self.routes
        own = self.node_id
        for item in msg.entries:
            try:
                dest, metric, seq = item
            except (TypeError, ValueError):
                self.malformed_entries += 1
                continue
            if (
                not isinstance(dest, int)
                or not isinstance(metric, int)
                or not isinstance(seq, int)
                or seq < 0
                or not 0 <= metric <= UNREACHABLE
                or (metric == UNREACHABLE) != (seq % 2 == 1)
            ):
                self.malformed_entries += 1
                continue
            if dest == own:
                continue  # own entry is authoritative
            if metric == UNREACHABLE:
                cand_metric = UNREACHABLE
            else:
                cand_metric = metric + 1
                if cand_metric >= UNREACHABLE:
                    continue  # hop count would collide with the sentinel
            incumbent = routes.get(dest)
            if incumbent is None:
                self._install(dest, from_, cand_metric, seq, now)
                changed.add(dest)
                if cand_metric != UNREACHABLE:
                    self.pending_advert.add(dest)
            elif route_preferred((cand_metric, seq), (incumbent[1], incumbent[2])):
                self._install(dest, from_, cand_metric, seq, now)
                changed.add(dest)
                if cand_metric != incumbent[1]:
                    self.pending_advert.add(dest)
        return changed

    def periodic_advertise(self, now: float) -> UpdateMessage:
        """Bump the own (even) sequence number and dump the whole table."""
        self.own_seq += 2
        self.routes[self.node_id] = (self.node_id, 0, self.own_seq, now)
        entries = [
            (dest, route[1], route[2]) for dest, route in sorted(self.routes.items())
        ]
        return UpdateMessage(self.node_id, "full", entries)

    def link_broken(self, neighbor: int, now: float) -> tuple[set[int], Optional[UpdateMessage]]:
        """Invalidate every route through a lost next hop.

        Each invalidated entry keeps its destination but gets the next odd
        sequence number; the returned incremental update advertises the breaks.
        """
        invalidated: set[int] = set()
        for dest, (nh, metric, seq, _) in list(self.routes.items()):
            if nh == neighbor and dest != self.node_id and metric != UNREACHABLE:
                self._install(dest, nh, UNREACHABLE, seq + 1, now)
                invalidated.add(dest)
        if not invalidated:
            return invalidated, None
        self.pending_advert |= invalidated
        entries = [(d, UNREACHABLE, self.routes[d][2]) for d in sorted(invalidated)]
        return invalidated, UpdateMessage(self.node_id, "incremental", entries)

    def take_triggered(self) -> Optional[UpdateMessage]:
        """Drain accumulated changes into one incremental update (or None)."""
        if not self.pending_advert:
            return None
        entries = [
            (d, self.routes[d][1], self.routes[d][2])
            for d in sorted(self.pending_advert)
            if d in self.routes
        ]
        self.pending_advert.clear()
        return UpdateMessage(self.node_id, "incremental", entries) if entries else None

    # -- forwarding support ---------------------------------------------------

    def lookup(self, dest: int) -> Optional[tuple[int, int, int]]:
        """(next_hop, metric, seq) for a usable route, else None."""
        route = self.routes.get(dest)
        if route is None or route[1] == UNREACHABLE:
            return None
        return (route[0], route[1], route[2])

    def buffer_packet(self, packet, now: float) -> bool:
        """Queue a packet awaiting a route; False means the buffer is full."""
        if len(self.pending) >= self.cfg.pending_packet_buffer:
            return False
        self.pending.append((packet, now))
        return True

    def drop_pending(self, packet) -> bool:
        for item in self.pending:
            if item[0] is packet:
                self.pending.remove(item)
                return True
        return False

    def flush_routable(self, dests: set[int]) -> list:
        """Remove and return buffered packets whose destination became routable."""
        if not self.pending:
            return []
        out = []
        kept = deque()
        for packet, at in self.pending:
            if packet.dst in dests and self.lookup(packet.dst) is not None:
                out.append(packet)
            else:
                kept.append((packet, at))
        self.pending = kept
        return out

    def snapshot(self) -> list[RouteEntry]:
        return [
            RouteEntry(dest, nh, metric, seq, ts)
            for dest, (nh, metric, seq, ts) in sorted(self.routes.items())
        ]
