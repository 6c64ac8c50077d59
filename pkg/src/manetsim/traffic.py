"""CBR traffic: random source-destination pairs emitting fixed-size packets.

Each pair sends one packet every 1/rate seconds (constant bit rate, not
Poisson), starting at a per-pair jitter inside the first interval so sources
do not fire in lockstep.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .engine import RngStream
from .dsdv import DATA_TTL


@dataclass(frozen=True)
class CbrConfig:
    pair_count: int = 10
    rate: float = 4.0  # packets/s per pair
    packet_size: int = 350  # bytes
    start_jitter: bool = True  # first send uniform in [0, 1/rate)

    def __post_init__(self):
        if self.pair_count < 1:
            raise ValueError("pair_count must be >= 1")
        if self.rate <= 0:
            raise ValueError("rate must be > 0")
        if self.packet_size <= 0:
            raise ValueError("packet_size must be > 0")


@dataclass(slots=True)
class Packet:
    id: int
    src: int
    dst: int
    created_at: float
    size: int
    delivered_at: Optional[float] = None
    dropped: Optional[str] = None  # "noroute" / "queue" / "ttl" when dropped
    hops: int = 0
    ttl: int = DATA_TTL


def generate_pairs(n_nodes: int, cfg: CbrConfig, rng: RngStream) -> list[tuple[int, int]]:
    """Distinct ordered (src, dst) pairs, src != dst, uniform without replacement."""
    if n_nodes < 2:
        raise ValueError("need at least two nodes for traffic")
    if cfg.pair_count > n_nodes * (n_nodes - 1):
        raise ValueError("pair_count exceeds the number of distinct ordered pairs")
    chosen: set[tuple[int, int]] = set()
    pairs = []
    while len(pairs) < cfg.pair_count:
        src = rng.randrange(n_nodes)
        dst = rng.randrange(n_nodes)
        if src == dst or (src, dst) in chosen:
            continue
        chosen.add((src, dst))
        pairs.append((src, dst))
    return pairs


def schedule_cbr(
    pairs: list[tuple[int, int]], cfg: CbrConfig, duration: float, rng: RngStream
) -> list[tuple[float, int, int]]:
    """All (send_time, src, dst) tuples over [0, duration], time-sorted.

    Sends land at jitter + k/rate for k = 0, 1, ...; t == duration is included.
    """
    if duration <= 0:
        raise ValueError("duration must be > 0")
    interval = 1.0 / cfg.rate
    sends = []
    for src, dst in pairs:
        start = rng.uniform(0.0, interval) if cfg.start_jitter else 0.0
        k = 0
        while True:
            t = start + k * interval
            if t > duration:
                break
            sends.append((t, src, dst))
            k += 1
    sends.sort()
    return sends
