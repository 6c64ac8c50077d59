"""One simulation cell: build a trace, run DSDV + CBR over it, extract metrics.

The run is deterministic in (config, seed).  Three independent random streams
keep the axes of the experiment separable: "mobility" drives trace generation,
"traffic" the CBR pairs and jitters, "protocol-jitter" the advertisement
desync, so changing the network load never perturbs node movement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from functools import partial
from typing import Optional

from .engine import Simulator, RngStream
from .mobility import (
    Field,
    GaussMarkovConfig,
    ManhattanConfig,
    MobilityTrace,
    RpgmConfig,
    RwpConfig,
    gm_generate,
    manhattan_generate,
    rpgm_generate,
    rwp_generate,
)
from .radio import Radio, RadioConfig, Frame, DELIVERED, DROP_QUEUE_FULL
from .dsdv import DsdvConfig, DsdvNode, UpdateMessage
from .traffic import CbrConfig, Packet, generate_pairs, schedule_cbr
from .metrics import RunResult, config_hash, compute_avg_delay, compute_pdf, NoDeliveriesError

MODELS = ("rwp", "rpgm", "gauss-markov", "manhattan")


@dataclass
class ScenarioConfig:
    """One cell of the experiment grid; defaults mirror the standard setup:
    100 nodes on 500x500 m for 100 s, pause 10 s."""

    model: str = "rwp"
    n_nodes: int = 100
    field_width: float = 500.0
    field_height: float = 500.0
    duration: float = 100.0
    pause: float = 10.0
    v_max: float = 5.0
    load: float = 4.0  # packets/s per pair
    pair_count: int = 10
    packet_size: int = 350
    seed: int = 1
    edge_margin: float = 25.0  # Gauss-Markov boundary avoidance band
    gm_alpha: float = 0.75
    radio: RadioConfig = field(default_factory=RadioConfig)
    dsdv: DsdvConfig = field(default_factory=DsdvConfig)
    model_params: dict = field(default_factory=dict)  # overrides for the model config

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        if self.n_nodes < 2:
            raise ValueError("need at least 2 nodes")
        if self.v_max <= 0 or self.load <= 0:
            raise ValueError("v_max and load must be > 0")
        if self.pause < 0:
            raise ValueError("pause must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    def hash(self) -> str:
        return config_hash(self.to_dict())


def build_trace(cfg: ScenarioConfig, rng: Optional[RngStream] = None) -> MobilityTrace:
    """Generate the movement trace for a scenario from its mobility stream."""
    cfg.validate()
    if rng is None:
        rng = RngStream(cfg.seed, "mobility")
    fld = Field(cfg.field_width, cfg.field_height, cfg.edge_margin)
    mp = cfg.model_params
    if cfg.model == "rwp":
        model_cfg = RwpConfig(**{"v_max": cfg.v_max, "pause": cfg.pause, **mp})
        return rwp_generate(fld, model_cfg, cfg.n_nodes, cfg.duration, rng)
    if cfg.model == "rpgm":
        defaults = dict(
            group_count=10, sdr=0.1, adr=0.1, max_speed=cfg.v_max,
            max_angle=math.pi, member_spread=50.0, update_interval=1.0,
        )
        return rpgm_generate(fld, RpgmConfig(**{**defaults, **mp}), cfg.n_nodes, cfg.duration, rng)
    if cfg.model == "gauss-markov":
        defaults = dict(
            alpha=cfg.gm_alpha, mean_speed=cfg.v_max / 2.0, sigma_speed=cfg.v_max / 4.0,
            sigma_direction=math.pi / 8.0, update_interval=1.0, max_speed=cfg.v_max,
        )
        return gm_generate(fld, GaussMarkovConfig(**{**defaults, **mp}), cfg.n_nodes, cfg.duration, rng)
    defaults = dict(
        v_max=cfg.v_max, horizontal_streets=6, vertical_streets=6,
        min_headway=5.0, update_interval=1.0,
    )
    return manhattan_generate(fld, ManhattanConfig(**{**defaults, **mp}), cfg.n_nodes, cfg.duration, rng)


class Simulation:
    """Wires the event engine, radio, per-node DSDV and the packet ledger."""

    def __init__(
        self,
        trace: MobilityTrace,
        n_nodes: int,
        radio_cfg: RadioConfig,
        dsdv_cfg: DsdvConfig,
        seed: int,
        packet_size: int = 350,
        log_events: bool = False,
    ):
        self.sim = Simulator(log_events=log_events)
        self.trace = trace
        self.n_nodes = n_nodes
        self.dsdv_cfg = dsdv_cfg
        self.packet_size = packet_size
        self.radio = Radio(radio_cfg, n_nodes, trace.position_at)
        self.nodes = [DsdvNode(i, dsdv_cfg) for i in range(n_nodes)]
        self._advert_scheduled = [False] * n_nodes
        self._jitter_rng = RngStream(seed, "protocol-jitter")
        self.ledger: list[Packet] = []
        self.journal: list[tuple] = []  # (what, packet_id, time, node)
        self.table_dumps: list[str] = []
        self._timeout_handles: dict[int, object] = {}  # packet id -> pending timeout event

    # -- setup ---------------------------------------------------------------

    def start_protocol(self) -> None:
        """First periodic advertisement per node lands inside the jitter window."""
        for i in range(self.n_nodes):
            at = self._jitter_rng.uniform(0.0, self.dsdv_cfg.jitter)
            self.sim.schedule(at, "periodic-advertisement", i, partial(self._on_periodic, i))

    def add_traffic(self, sends: list[tuple[float, int, int]]) -> None:
        for t, src, dst in sends:
            self.sim.schedule(t, "packet-send", src, partial(self._on_packet_send, src, dst))

    def schedule_table_dumps(self, times: list[float]) -> None:
        for t in times:
            self.sim.schedule(t, "metric-sample", "*", partial(self._dump_tables, t))

    def run(self, until: float):
        return self.sim.run(until)

    # -- traffic path ----------------------------------------------------------

    def _on_packet_send(self, src: int, dst: int) -> None:
        now = self.sim.now
        pkt = Packet(len(self.ledger), src, dst, now, self.packet_size)
        self.ledger.append(pkt)
        self.journal.append(("origin", pkt.id, now, src))
        self._route_packet(src, pkt)

    def _route_packet(self, node_id: int, pkt: Packet) -> None:
        now = self.sim.now
        if pkt.ttl <= 0:
            pkt.dropped = "ttl"
            self.journal.append(("drop-ttl", pkt.id, now, node_id))
            return
        node = self.nodes[node_id]
        route = node.lookup(pkt.dst)
        if route is None:
            self._buffer_packet(node_id, pkt)
            return
        next_hop = route[0]
        result = self.radio.transmit(Frame(pkt, pkt.size, node_id, next_hop), now)
        if result.status == DELIVERED:
            pkt.hops += 1
            pkt.ttl -= 1
            self.journal.append(("forward", pkt.id, now, node_id))
            self.sim.schedule(
                result.deliver_at, "packet-receive", next_hop,
                partial(self._on_data_receive, next_hop, pkt),
            )
        elif result.status == DROP_QUEUE_FULL:
            pkt.dropped = "queue"
            self.journal.append(("drop-queue", pkt.id, now, node_id))
        else:
            # next hop out of range: broken link, then retry (the route just
            # died, so this lands in the pending buffer)
            self._handle_link_break(node_id, next_hop)
            self._route_packet(node_id, pkt)

    def _buffer_packet(self, node_id: int, pkt: Packet) -> None:
        now = self.sim.now
        node = self.nodes[node_id]
        if node.buffer_packet(pkt, now):
            self.journal.append(("buffer", pkt.id, now, node_id))
            self._timeout_handles[pkt.id] = self.sim.schedule(
                now + self.dsdv_cfg.pending_timeout, "packet-timeout", node_id,
                partial(self._on_packet_timeout, node_id, pkt),
            )
        else:
            pkt.dropped = "noroute"
            self.journal.append(("drop-noroute", pkt.id, now, node_id))

    def _on_packet_timeout(self, node_id: int, pkt: Packet) -> None:
        self._timeout_handles.pop(pkt.id, None)
        if self.nodes[node_id].drop_pending(pkt):
            pkt.dropped = "noroute"
            self.journal.append(("drop-noroute", pkt.id, self.sim.now, node_id))

    def _on_data_receive(self, node_id: int, pkt: Packet) -> None:
        now = self.sim.now
        self.journal.append(("receive", pkt.id, now, node_id))
        if pkt.dst == node_id:
            pkt.delivered_at = now
            self.journal.append(("deliver", pkt.id, now, node_id))
        else:
            self._route_packet(node_id, pkt)

    # -- protocol path ---------------------------------------------------------

    def _on_periodic(self, node_id: int) -> None:
        now = self.sim.now
        msg = self.nodes[node_id].periodic_advertise(now)
        self._broadcast(node_id, msg)
        nxt = now + self.dsdv_cfg.periodic_interval + self._jitter_rng.uniform(
            0.0, self.dsdv_cfg.jitter
        )
        self.sim.schedule(nxt, "periodic-advertisement", node_id, partial(self._on_periodic, node_id))

    def _broadcast(self, node_id: int, msg: UpdateMessage) -> None:
        result = self.radio.transmit(Frame(msg, msg.size_bytes, node_id, None), self.sim.now)
        if result.status == DELIVERED:
            for nb in result.recipients:
                self.sim.schedule(
                    result.deliver_at, "packet-receive", nb,
                    partial(self._on_update_receive, nb, node_id, msg),
                )

    def _on_update_receive(self, node_id: int, from_: int, msg: UpdateMessage) -> None:
        now = self.sim.now
        node = self.nodes[node_id]
        changed = node.handle_update(from_, msg, now)
        if changed:
            for pkt in node.flush_routable(changed):
                handle = self._timeout_handles.pop(pkt.id, None)
                if handle is not None:
                    self.sim.cancel(handle)
                self.journal.append(("unbuffer", pkt.id, now, node_id))
                self._route_packet(node_id, pkt)
        self._maybe_schedule_triggered(node_id)

    def _handle_link_break(self, node_id: int, neighbor: int) -> None:
        self.nodes[node_id].link_broken(neighbor, self.sim.now)
        self._maybe_schedule_triggered(node_id)

    def _maybe_schedule_triggered(self, node_id: int) -> None:
        # batch all changes of one dispatch instant into one incremental update
        if self.nodes[node_id].pending_advert and not self._advert_scheduled[node_id]:
            self._advert_scheduled[node_id] = True
            self.sim.schedule(
                self.sim.now, "triggered-advertisement", node_id,
                partial(self._on_triggered, node_id),
            )

    def _on_triggered(self, node_id: int) -> None:
        self._advert_scheduled[node_id] = False
        msg = self.nodes[node_id].take_triggered()
        if msg is not None:
            self._broadcast(node_id, msg)

    # -- debug surface -----------------------------------------------------------

    def _dump_tables(self, t: float) -> None:
        lines = [f"# tables at t={t}"]
        for node in self.nodes:
            for entry in node.snapshot():
                lines.append(
                    f"{node.node_id}\t{entry.dest}\t{entry.next_hop}\t{entry.metric}\t{entry.seq}"
                )
        self.table_dumps.append("\n".join(lines))


def simulate(cfg: ScenarioConfig, log_events: bool = False) -> tuple[RunResult, Simulation]:
    """Run one cell and return its result plus the full simulation state."""
    cfg.validate()
    trace = build_trace(cfg)
    sim = Simulation(
        trace, cfg.n_nodes, cfg.radio, cfg.dsdv, cfg.seed,
        packet_size=cfg.packet_size, log_events=log_events,
    )
    traffic_rng = RngStream(cfg.seed, "traffic")
    cbr = CbrConfig(pair_count=cfg.pair_count, rate=cfg.load, packet_size=cfg.packet_size)
    pairs = generate_pairs(cfg.n_nodes, cbr, traffic_rng)
    sim.add_traffic(schedule_cbr(pairs, cbr, cfg.duration, traffic_rng))
    sim.start_protocol()
    sim.run(cfg.duration)

    ledger = sim.ledger
    drops = {"noroute": 0, "queue": 0, "ttl": 0}
    delivered = 0
    for pkt in ledger:
        if pkt.delivered_at is not None:
            delivered += 1
        elif pkt.dropped is not None:
            drops[pkt.dropped] += 1
    in_flight = len(ledger) - delivered - sum(drops.values())
    try:
        avg_delay = compute_avg_delay(ledger)
    except NoDeliveriesError:
        avg_delay = None
    result = RunResult(
        model=cfg.model,
        speed=cfg.v_max,
        load=cfg.load,
        seed=cfg.seed,
        originated=len(ledger),
        delivered=delivered,
        pdf=compute_pdf(ledger) if ledger else 0.0,
        avg_delay=avg_delay,
        drops_noroute=drops["noroute"],
        drops_queue=drops["queue"],
        drops_ttl=drops["ttl"],
        in_flight=in_flight,
        config_hash=cfg.hash(),
        extra={
            "frames_transmitted": sim.radio.stats.transmitted,
            "frames_delivered": sim.radio.stats.delivered,
            "frames_dropped_no_link": sim.radio.stats.dropped_no_link,
            "frames_dropped_queue_full": sim.radio.stats.dropped_queue_full,
        },
    )
    return result, sim


def run_scenario(cfg: ScenarioConfig) -> RunResult:
    """Public single-cell entry point; deterministic in (config, seed)."""
    return simulate(cfg)[0]
