"""Mobility models producing piecewise-linear movement traces on a bounded field.

Four generators are provided: random waypoint, reference-point group mobility,
Gauss-Markov, and a Manhattan street grid.  Each is a pure function of
(config, rng stream): replaying with the same seed reproduces the trace
exactly.  Traces hold per-node waypoint lists; positions between waypoints
come from linear interpolation.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .engine import RngStream

TAU = 2.0 * math.pi


class Velocity(NamedTuple):
    speed: float  # m/s, non-negative
    direction: float  # radians in [0, 2*pi)


@dataclass(frozen=True)
class Field:
    width: float
    height: float
    edge_margin: float = 0.0  # only the Gauss-Markov model uses this

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("field dimensions must be positive")
        if not 0 <= self.edge_margin < min(self.width, self.height) / 2:
            raise ValueError("edge_margin must be in [0, min(w,h)/2)")

    def contains(self, x: float, y: float, tol: float = 1e-9) -> bool:
        return -tol <= x <= self.width + tol and -tol <= y <= self.height + tol

    def clamp(self, x: float, y: float) -> tuple[float, float]:
        return (min(max(x, 0.0), self.width), min(max(y, 0.0), self.height))


class MobilityTrace:
    """Per-node waypoint schedule with interpolated position queries.

    Waypoint times are strictly increasing per node.  A node is stationary
    after its last waypoint, so queries up to the trace duration are always
    answered.  Queries are O(1) amortized for non-decreasing t (the common
    access pattern inside a run).
    """

    def __init__(self, duration: float):
        if duration <= 0:
            raise ValueError("duration must be > 0")
        self.duration = duration
        self._times: list[list[float]] = []
        self._xs: list[list[float]] = []
        self._ys: list[list[float]] = []
        self._speeds: list[list[float]] = []
        self._cursor: list[int] = []

    @property
    def n_nodes(self) -> int:
        return len(self._times)

    def add_node(self) -> int:
        self._times.append([])
        self._xs.append([])
        self._ys.append([])
        self._speeds.append([])
        self._cursor.append(0)
        return len(self._times) - 1

    def append(self, node: int, t: float, x: float, y: float, speed: float) -> None:
        times = self._times[node]
        if times and t <= times[-1]:
            raise ValueError(f"waypoint times must be strictly increasing (node {node})")
        times.append(t)
        self._xs[node].append(x)
        self._ys[node].append(y)
        self._speeds[node].append(speed)

    def waypoints(self, node: int) -> list[tuple[float, float, float, float]]:
        return list(
            zip(self._times[node], self._xs[node], self._ys[node], self._speeds[node])
        )

    def last_time(self, node: int) -> float:
        return self._times[node][-1]

    @classmethod
    def static(cls, positions: Sequence[tuple[float, float]], duration: float) -> "MobilityTrace":
        trace = cls(duration)
        for x, y in positions:
            node = trace.add_node()
            trace.append(node, 0.0, x, y, 0.0)
        return trace

    def position_at(self, node: int, t: float) -> tuple[float, float]:
        if t < 0 or t > self.duration + 1e-9:
            raise ValueError(f"t={t} outside trace span [0, {self.duration}]")
        times = self._times[node]
        xs, ys = self._xs[node], self._ys[node]
        n = len(times)
        i = self._cursor[node]
        if i >= n or times[i] > t:
            i = bisect_right(times, t) - 1
        else:
            while i + 1 < n and times[i + 1] <= t:
                i += 1
        self._cursor[node] = max(i, 0)
        if i < 0:
            return (xs[0], ys[0])
        if i == n - 1:
            return (xs[i], ys[i])
        t0, t1 = times[i], times[i + 1]
        frac = (t - t0) / (t1 - t0)
        return (xs[i] + frac * (xs[i + 1] - xs[i]), ys[i] + frac * (ys[i + 1] - ys[i]))

    def positions_at(self, t: float) -> list[tuple[float, float]]:
        return [self.position_at(node, t) for node in range(self.n_nodes)]


def trace_position(trace: MobilityTrace, node: int, t: float) -> tuple[float, float]:
    """Interpolated position of node at time t; exact at waypoint times."""
    return trace.position_at(node, t)


# ---------------------------------------------------------------------------
# Random waypoint


@dataclass(frozen=True)
class RwpConfig:
    v_max: float  # m/s
    pause: float = 0.0  # seconds at each reached waypoint

    def __post_init__(self):
        if self.v_max <= 0:
            raise ValueError("v_max must be > 0")
        if self.pause < 0:
            raise ValueError("pause must be >= 0")


def rwp_generate(
    field: Field, cfg: RwpConfig, n: int, duration: float, rng: RngStream
) -> MobilityTrace:
    """Alternate straight legs toward uniform random waypoints with fixed pauses.

    Leg speeds are uniform on (0, v_max]: the half-open interval avoids the
    degenerate zero-speed leg that would never terminate.
    """
    if n < 1:
        raise ValueError("need at least one node")
    trace = MobilityTrace(duration)
    for _ in range(n):
        node = trace.add_node()
        x = rng.uniform(0.0, field.width)
        y = rng.uniform(0.0, field.height)
        trace.append(node, 0.0, x, y, 0.0)
        t = 0.0
        while t < duration:
            wx = rng.uniform(0.0, field.width)
            wy = rng.uniform(0.0, field.height)
            speed = cfg.v_max * (1.0 - rng.random())
            dist = math.hypot(wx - x, wy - y)
            if dist == 0.0:
                continue
            travel = dist / speed
            if t + travel >= duration:
                frac = (duration - t) / travel
                trace.append(node, duration, x + frac * (wx - x), y + frac * (wy - y), speed)
                break
            t += travel
            x, y = wx, wy
            trace.append(node, t, x, y, speed)
            if cfg.pause > 0.0:
                if t + cfg.pause >= duration:
                    trace.append(node, duration, x, y, 0.0)
                    break
                t += cfg.pause
                trace.append(node, t, x, y, 0.0)
    return trace


# ---------------------------------------------------------------------------
# Reference-point group mobility


@dataclass(frozen=True)
class RpgmConfig:
    group_count: int
    sdr: float  # speed deviation ratio in [0, 1]
    adr: float  # angle deviation ratio in [0, 1]
    max_speed: float
    max_angle: float = math.pi
    member_spread: float = 50.0  # initial uniform radius around the leader
    update_interval: float = 1.0  # member velocity refresh period

    def __post_init__(self):
        if not (0.0 <= self.sdr <= 1.0 and 0.0 <= self.adr <= 1.0):
            raise ValueError("sdr and adr must be in [0, 1]")
        if self.group_count < 1:
            raise ValueError("group_count must be >= 1")
        if self.max_speed <= 0 or self.max_angle <= 0:
            raise ValueError("max_speed and max_angle must be > 0")
        if self.update_interval <= 0:
            raise ValueError("update_interval must be > 0")


def rpgm_member_velocity(leader: Velocity, cfg: RpgmConfig, rng: RngStream) -> Velocity:
    """Deviate a member's velocity from its leader's.

    Deviation draws are uniform on [-1, 1] so the leader's velocity is the
    member mean; speed is clamped to [0, max_speed].
    """
    if leader.speed > cfg.max_speed * (1.0 + 1e-9):
        raise ValueError("leader speed exceeds configured max_speed")
    u1 = rng.uniform(-1.0, 1.0)
    u2 = rng.uniform(-1.0, 1.0)
    speed = leader.speed + u1 * cfg.sdr * cfg.max_speed
    speed = min(max(speed, 0.0), cfg.max_speed)
    direction = (leader.direction + u2 * cfg.adr * cfg.max_angle) % TAU
    return Velocity(speed, direction)


def rpgm_generate(
    field: Field, cfg: RpgmConfig, n: int, duration: float, rng: RngStream
) -> MobilityTrace:
    """Group mobility: virtual leaders roam (pause-free random waypoint), members
    re-derive their velocity from the leader's at every update instant.

    Nodes are assigned to groups round-robin.  Each step moves a member by the
    leader's mean velocity over the step plus the drawn deviation, so with
    sdr = adr = 0 and zero spread the member traces equal the leader's exactly.
    """
    if n < cfg.group_count:
        raise ValueError("group_count cannot exceed node count")
    leaders = rwp_generate(
        field, RwpConfig(v_max=cfg.max_speed, pause=0.0), cfg.group_count, duration, rng
    )
    trace = MobilityTrace(duration)
    group = [i % cfg.group_count for i in range(n)]
    pos: list[tuple[float, float]] = []
    for i in range(n):
        node = trace.add_node()
        lx, ly = leaders.position_at(group[i], 0.0)
        r = cfg.member_spread * math.sqrt(rng.random())
        ang = rng.uniform(0.0, TAU)
        x, y = field.clamp(lx + r * math.cos(ang), ly + r * math.sin(ang))
        pos.append((x, y))
        trace.append(node, 0.0, x, y, 0.0)

    t = 0.0
    while t < duration:
        t_next = min(t + cfg.update_interval, duration)
        dt = t_next - t
        leader_vel = []
        for g in range(cfg.group_count):
            x0, y0 = leaders.position_at(g, t)
            x1, y1 = leaders.position_at(g, t_next)
            dist = math.hypot(x1 - x0, y1 - y0)
            direction = math.atan2(y1 - y0, x1 - x0) % TAU if dist > 0 else 0.0
            leader_vel.append(Velocity(dist / dt, direction))
        for i in range(n):
            vel = rpgm_member_velocity(leader_vel[group[i]], cfg, rng)
            x, y = pos[i]
            nx = x + vel.speed * math.cos(vel.direction) * dt
            ny = y + vel.speed * math.sin(vel.direction) * dt
            nx, ny = field.clamp(nx, ny)
            pos[i] = (nx, ny)
            trace.append(i, t_next, nx, ny, math.hypot(nx - x, ny - y) / dt)
        t = t_next
    return trace


# ---------------------------------------------------------------------------
# Gauss-Markov


@dataclass(frozen=True)
class GaussMarkovConfig:
    alpha: float  # memory parameter in [0, 1]
    mean_speed: float
    sigma_speed: float
    sigma_direction: float
    mean_direction: Optional[float] = None  # None: drawn per node at start
    update_interval: float = 1.0
    max_speed: Optional[float] = None  # optional cap on the speed process

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.update_interval <= 0:
            raise ValueError("update_interval must be > 0")


@dataclass
class GaussMarkovState:
    s: float  # current speed
    d: float  # current direction
    x: float
    y: float


def gm_update(
    state: GaussMarkovState,
    cfg: GaussMarkovConfig,
    rng: RngStream,
    field: Optional[Field] = None,
    mean_direction: Optional[float] = None,
) -> GaussMarkovState:
    """One memory-weighted speed/direction update.

    alpha=1 keeps speed and direction constant; alpha=0 redraws them around the
    means.  When a field is given and the node sits within edge_margin of a
    boundary, the mean direction is replaced by the bearing to the field
    center so nodes drift away from edges.
    """
    sx = rng.gauss(0.0, cfg.sigma_speed)
    dx = rng.gauss(0.0, cfg.sigma_direction)
    a = cfg.alpha
    root = math.sqrt(max(0.0, 1.0 - a * a))
    s = a * state.s + (1.0 - a) * cfg.mean_speed + root * sx
    s = max(0.0, s)
    if cfg.max_speed is not None:
        s = min(s, cfg.max_speed)

    d_mean = mean_direction if mean_direction is not None else cfg.mean_direction
    if d_mean is None:
        raise ValueError("mean_direction unresolved; set it in the config or pass it in")
    if field is not None and field.edge_margin > 0:
        m = field.edge_margin
        if (
            state.x < m
            or state.x > field.width - m
            or state.y < m
            or state.y > field.height - m
        ):
            d_mean = math.atan2(field.height / 2 - state.y, field.width / 2 - state.x) % TAU
    # blend against the 2*pi-representative nearest the current direction so
    # the weighted mean never takes the long way around the circle
    d_mean = d_mean + TAU * round((state.d - d_mean) / TAU)
    d = (a * state.d + (1.0 - a) * d_mean + root * dx) % TAU
    return GaussMarkovState(s, d, state.x, state.y)


def gm_advance(
    state: GaussMarkovState,
    cfg: GaussMarkovConfig,
    field: Field,
    dt: Optional[float] = None,
) -> tuple[float, float]:
    """Move one interval at the current speed/direction, reflecting at borders."""
    step = cfg.update_interval if dt is None else dt
    x = state.x + state.s * math.cos(state.d) * step
    y = state.y + state.s * math.sin(state.d) * step
    while not (0.0 <= x <= field.width):
        x = -x if x < 0 else 2.0 * field.width - x
    while not (0.0 <= y <= field.height):
        y = -y if y < 0 else 2.0 * field.height - y
    return (x, y)


def gm_generate(
    field: Field, cfg: GaussMarkovConfig, n: int, duration: float, rng: RngStream
) -> MobilityTrace:
    if n < 1:
        raise ValueError("need at least one node")
    trace = MobilityTrace(duration)
    for _ in range(n):
        node = trace.add_node()
        x = rng.uniform(0.0, field.width)
        y = rng.uniform(0.0, field.height)
        s0 = max(0.0, rng.gauss(cfg.mean_speed, cfg.sigma_speed))
        if cfg.max_speed is not None:
            s0 = min(s0, cfg.max_speed)
        d0 = rng.uniform(0.0, TAU)
        d_mean = cfg.mean_direction if cfg.mean_direction is not None else rng.uniform(0.0, TAU)
        state = GaussMarkovState(s0, d0, x, y)
        trace.append(node, 0.0, x, y, 0.0)
        t = 0.0
        while t < duration:
            t_next = min(t + cfg.update_interval, duration)
            dt = t_next - t
            raw_x = state.x + state.s * math.cos(state.d) * dt
            raw_y = state.y + state.s * math.sin(state.d) * dt
            nx, ny = gm_advance(state, cfg, field, dt)
            if nx != raw_x:  # reflected off a vertical border
                state.d = (math.pi - state.d) % TAU
            if ny != raw_y:  # reflected off a horizontal border
                state.d = (-state.d) % TAU
            speed = math.hypot(nx - state.x, ny - state.y) / dt
            state.x, state.y = nx, ny
            trace.append(node, t_next, nx, ny, speed)
            state = gm_update(state, cfg, rng, field=field, mean_direction=d_mean)
            t = t_next
    return trace


# ---------------------------------------------------------------------------
# Manhattan grid


@dataclass(frozen=True)
class ManhattanConfig:
    v_max: float
    horizontal_streets: int = 6
    vertical_streets: int = 6
    min_headway: float = 5.0  # car-following safety gap, meters
    update_interval: float = 1.0

    def __post_init__(self):
        if self.horizontal_streets < 2 or self.vertical_streets < 2:
            raise ValueError("need at least 2 streets per axis so intersections exist")
        if self.v_max <= 0:
            raise ValueError("v_max must be > 0")
        if self.min_headway < 0:
            raise ValueError("min_headway must be >= 0")


def manhattan_turn(rng: RngStream) -> str:
    """Intersection choice: straight 0.5, left 0.25, right 0.25."""
    u = rng.random()
    if u < 0.5:
        return "straight"
    if u < 0.75:
        return "left"
    return "right"


def car_following_speed(
    desired: float, gap: Optional[float], pred_speed: Optional[float],
    min_headway: float, dt: float,
) -> float:
    """Slot speed limited by the node ahead on the same lane, if any."""
    if gap is None:
        return desired
    closing_limit = max(0.0, gap - min_headway) / dt
    return min(desired, pred_speed, closing_limit)


class _LaneNode:
    __slots__ = ("axis", "street", "sign", "x", "y", "desired", "speed")

    def __init__(self, axis, street, sign, x, y, desired):
        self.axis = axis  # 0 horizontal (moves in x), 1 vertical (moves in y)
        self.street = street
        self.sign = sign  # +1 / -1 along the moving axis
        self.x = x
        self.y = y
        self.desired = desired
        self.speed = 0.0  # actual speed of the previous slot

    def lane(self):
        return (self.axis, self.street, self.sign)

    def along(self):
        return self.x if self.axis == 0 else self.y


def _turn_heading(axis: int, sign: int, choice: str) -> tuple[int, int]:
    # headings as (dx, dy) signs; left = CCW rotation, right = CW
    dx, dy = (sign, 0) if axis == 0 else (0, sign)
    if choice == "left":
        dx, dy = -dy, dx
    elif choice == "right":
        dx, dy = dy, -dx
    elif choice == "reverse":
        dx, dy = -dx, -dy
    return (0, dx) if dx != 0 else (1, dy)


def manhattan_generate(
    field: Field, cfg: ManhattanConfig, n: int, duration: float, rng: RngStream
) -> MobilityTrace:
    """Lane-constrained grid movement with probabilistic turns and car-following.

    Streets are evenly spaced across the field, border lines included.  Node
    speed each slot is the temporally-correlated desired speed capped by the
    predecessor on the same lane and the headway gap.  Waypoints are emitted
    at every slot boundary and at each intersection crossing, so interpolated
    positions always lie on a street line.
    """
    if n < 1:
        raise ValueError("need at least one node")
    xs = [i * field.width / (cfg.vertical_streets - 1) for i in range(cfg.vertical_streets)]
    ys = [j * field.height / (cfg.horizontal_streets - 1) for j in range(cfg.horizontal_streets)]
    a_max = 0.5 * cfg.v_max  # desired-speed drift per second

    trace = MobilityTrace(duration)
    nodes: list[_LaneNode] = []
    for _ in range(n):
        trace.add_node()
        idx = rng.randrange(cfg.horizontal_streets + cfg.vertical_streets)
        sign = 1 if rng.random() < 0.5 else -1
        desired = rng.uniform(0.0, cfg.v_max)
        if idx < cfg.horizontal_streets:
            node = _LaneNode(0, idx, sign, rng.uniform(0.0, field.width), ys[idx], desired)
        else:
            j = idx - cfg.horizontal_streets
            node = _LaneNode(1, j, sign, xs[j], rng.uniform(0.0, field.height), desired)
        nodes.append(node)
        trace.append(len(nodes) - 1, 0.0, node.x, node.y, 0.0)

    moving = [False] * n
    t = 0.0
    while t < duration:
        t_next = min(t + cfg.update_interval, duration)
        dt = t_next - t
        # lane occupancy and speeds snapshotted at slot start (synchronous update)
        prev_speed = [node.speed for node in nodes]
        lanes: dict[tuple, list[tuple[float, int]]] = {}
        for i, node in enumerate(nodes):
            lanes.setdefault(node.lane(), []).append((node.along(), i))
        for i, node in enumerate(nodes):
            node.desired = min(
                max(node.desired + rng.uniform(-1.0, 1.0) * a_max * dt, 0.0), cfg.v_max
            )
            gap = pred_speed = None
            here = node.along()
            for other_along, j in lanes[node.lane()]:
                d = (other_along - here) * node.sign
                if j != i and d > 0 and (gap is None or d < gap):
                    gap, pred_speed = d, prev_speed[j]
            v = car_following_speed(node.desired, gap, pred_speed, cfg.min_headway, dt)
            node.speed = v
            if v <= 0.0:
                moving[i] = False
                continue
            if not moving[i] and trace.last_time(i) < t:
                trace.append(i, t, node.x, node.y, 0.0)
            moving[i] = True
            _advance_on_grid(node, v, dt, t, i, trace, xs, ys, field, rng)
        t = t_next
    return trace


def _advance_on_grid(node, v, dt, t0, idx, trace, xs, ys, field, rng):
    remaining = v * dt
    t_cursor = t0
    while remaining > 0.0:
        grid = xs if node.axis == 0 else ys
        along = node.along()
        # nearest intersection strictly ahead along the heading
        ahead = [g for g in grid if (g - along) * node.sign > 1e-12]
        if not ahead:
            # sitting exactly on a border intersection, heading outward
            _apply_turn(node, "reverse", xs, ys, field)
            continue
        limit = min(ahead, key=lambda g: abs(g - along))
        dist_next = abs(limit - along)
        if remaining < dist_next:
            along += node.sign * remaining
            t_cursor += remaining / v
            if node.axis == 0:
                node.x = along
            else:
                node.y = along
            trace.append(idx, t_cursor, node.x, node.y, v)
            return
        # reach the intersection, record the corner, then turn
        remaining -= dist_next
        t_cursor += dist_next / v
        if node.axis == 0:
            node.x = limit
        else:
            node.y = limit
        _apply_turn(node, manhattan_turn(rng), xs, ys, field)
        trace.append(idx, t_cursor, node.x, node.y, v)
        if remaining <= 0.0:
            return


def _apply_turn(node, choice, xs, ys, field):
    for attempt in (choice, "straight", "left", "right", "reverse"):
        axis, sign = _turn_heading(node.axis, node.sign, attempt)
        if _heading_feasible(node.x, node.y, axis, sign, field):
            if axis != node.axis:
                # index of the crossing street through this intersection:
                # vertical streets are fixed-x lines, horizontal fixed-y
                grid, coord = (xs, node.x) if axis == 1 else (ys, node.y)
                node.street = min(range(len(grid)), key=lambda k: abs(grid[k] - coord))
            node.axis, node.sign = axis, sign
            return
    raise AssertionError("no feasible heading at intersection")  # pragma: no cover


def _heading_feasible(x, y, axis, sign, field) -> bool:
    # feasible iff the field leaves room to move that way (turns happen at
    # intersections, so the crossing street always exists)
    if axis == 0:
        return x < field.width - 1e-9 if sign > 0 else x > 1e-9
    return y < field.height - 1e-9 if sign > 0 else y > 1e-9
