"""Run outputs: packet delivery fraction and average end-to-end delay.

Both are computed from the immutable packet ledger a run leaves behind.
Undelivered packets count in the PDF denominator but never contribute delay;
packets still in flight when the clock stops count as undelivered.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from typing import Iterable, Optional

REQUIRED_SPEEDS = (5.0, 10.0, 15.0, 20.0, 25.0)


class NoTrafficError(ValueError):
    """PDF is undefined when the run originated zero packets."""


class NoDeliveriesError(ValueError):
    """Average delay is undefined when nothing was delivered."""


def compute_pdf(packets: Iterable) -> float:
    originated = delivered = 0
    for p in packets:
        originated += 1
        if p.delivered_at is not None:
            delivered += 1
    if originated == 0:
        raise NoTrafficError("no packets originated")
    return delivered / originated


def compute_avg_delay(packets: Iterable) -> float:
    total = 0.0
    count = 0
    for p in packets:
        if p.delivered_at is not None:
            total += p.delivered_at - p.created_at
            count += 1
    if count == 0:
        raise NoDeliveriesError("no packets delivered")
    return total / count


@dataclass
class RunResult:
    model: str
    speed: float
    load: float
    seed: int
    originated: int
    delivered: int
    pdf: float
    avg_delay: Optional[float]  # None when nothing was delivered
    drops_noroute: int
    drops_queue: int
    drops_ttl: int
    in_flight: int
    config_hash: str
    extra: dict = field(default_factory=dict)

    def conservation_holds(self) -> bool:
        return (
            self.originated
            == self.delivered
            + self.drops_noroute
            + self.drops_queue
            + self.drops_ttl
            + self.in_flight
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def config_hash(config_dict: dict) -> str:
    canonical = json.dumps(config_dict, sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def aggregate_over_speeds(
    results_by_speed: dict[float, "RunResult"],
    required_speeds: tuple = REQUIRED_SPEEDS,
) -> tuple[float, float]:
    """(mean pdf, mean delay) across the speed axis for one (model, load) cell."""
    missing = [s for s in required_speeds if s not in results_by_speed]
    if missing:
        raise ValueError(f"missing results for speeds: {missing}")
    pdfs = []
    delays = []
    for s in required_speeds:
        r = results_by_speed[s]
        pdfs.append(r.pdf)
        if r.avg_delay is None:
            raise NoDeliveriesError(f"delay undefined for speed {s}")
        delays.append(r.avg_delay)
    return (sum(pdfs) / len(pdfs), sum(delays) / len(delays))
