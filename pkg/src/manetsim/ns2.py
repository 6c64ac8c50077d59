"""NS-2 movement-trace interchange.

Per node the exporter writes three initial-position lines and one setdest
command per movement leg:

    $node_(0) set X_ 12.000000
    $node_(0) set Y_ 34.000000
    $node_(0) set Z_ 0.0
    $ns_ at 0.000000 "$node_(0) setdest 56.000000 78.000000 5.000000"

Values carry at least six decimal places; extra digits are kept whenever six
would not parse back to the same float, so an exported trace re-imports to
pointwise-identical positions.  Pauses need no command: a node simply stays
put until the next setdest fires.
"""

from __future__ import annotations

import math
import re

from .mobility import MobilityTrace

_INIT_RE = re.compile(r'^\$node_\((\d+)\)\s+set\s+([XYZ])_\s+(\S+)\s*$')
_SETDEST_RE = re.compile(
    r'^\$ns_\s+at\s+(\S+)\s+"\$node_\((\d+)\)\s+setdest\s+(\S+)\s+(\S+)\s+(\S+)"\s*$'
)


class Ns2ParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _fmt(x: float) -> str:
    """Shortest representation with >= 6 decimals that parses back exactly."""
    for spec in ("%.6f", "%.9f", "%.12f"):
        s = spec % x
        if float(s) == x:
            return s
    return repr(x)


def export_ns2_trace(trace: MobilityTrace) -> str:
    lines = []
    for node in range(trace.n_nodes):
        wps = trace.waypoints(node)
        t0, x0, y0, _ = wps[0]
        lines.append(f"$node_({node}) set X_ {_fmt(x0)}")
        lines.append(f"$node_({node}) set Y_ {_fmt(y0)}")
        lines.append(f"$node_({node}) set Z_ 0.0")
        px, py, pt = x0, y0, t0
        for t, x, y, _speed in wps[1:]:
            dist = math.hypot(x - px, y - py)
            if dist > 0.0:
                speed = dist / (t - pt)
                lines.append(
                    f'$ns_ at {_fmt(pt)} "$node_({node}) setdest {_fmt(x)} {_fmt(y)} {_fmt(speed)}"'
                )
            px, py, pt = x, y, t
    return "\n".join(lines) + "\n" if lines else ""


def import_ns2_trace(text: str) -> MobilityTrace:
    """Inverse of export up to float formatting.

    Raises Ns2ParseError (with the offending line number) on malformed input
    and ValueError on empty input.
    """
    init: dict[int, dict[str, float]] = {}
    commands: dict[int, list[tuple[float, float, float, float]]] = {}
    any_line = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        any_line = True
        m = _INIT_RE.match(line)
        if m:
            node, axis, value = int(m.group(1)), m.group(2), m.group(3)
            try:
                init.setdefault(node, {})[axis] = float(value)
            except ValueError:
                raise Ns2ParseError(lineno, f"bad coordinate {value!r}") from None
            continue
        m = _SETDEST_RE.match(line)
        if m:
            node = int(m.group(2))
            try:
                t, x, y, speed = (float(m.group(i)) for i in (1, 3, 4, 5))
            except ValueError:
                raise Ns2ParseError(lineno, "non-numeric setdest field") from None
            if speed <= 0:
                raise Ns2ParseError(lineno, f"setdest speed must be > 0, got {speed}")
            if t < 0:
                raise Ns2ParseError(lineno, f"negative command time {t}")
            commands.setdefault(node, []).append((t, x, y, speed))
            continue
        raise Ns2ParseError(lineno, f"unrecognized line: {raw!r}")

    if not any_line:
        raise ValueError("empty trace input")
    nodes = sorted(init)
    if not nodes:
        raise ValueError("no node initial positions found")
    if nodes != list(range(len(nodes))):
        raise ValueError(f"node ids must be dense starting at 0, got {nodes}")
    for node in commands:
        if node not in init:
            raise ValueError(f"setdest for node {node} without initial position")

    # replay commands into waypoints; duration is the last arrival anywhere
    replayed: dict[int, list[tuple[float, float, float, float]]] = {}
    duration = 0.0
    for node in nodes:
        pos = init[node]
        if "X" not in pos or "Y" not in pos:
            raise ValueError(f"node {node} missing X_ or Y_ initial line")
        x, y = pos["X"], pos["Y"]
        wps = [(0.0, x, y, 0.0)]
        t_free = 0.0  # when the node finished its previous leg
        for t_cmd, wx, wy, speed in sorted(commands.get(node, [])):
            if t_cmd < t_free - 1e-12:
                raise ValueError(
                    f"node {node}: setdest at {t_cmd} overlaps leg ending at {t_free}"
                )
            if t_cmd > t_free and t_cmd > wps[-1][0]:
                wps.append((t_cmd, x, y, 0.0))  # pause until the command fires
            dist = math.hypot(wx - x, wy - y)
            if dist == 0.0:
                continue
            t_arr = t_cmd + dist / speed
            wps.append((t_arr, wx, wy, speed))
            x, y = wx, wy
            t_free = t_arr
        replayed[node] = wps
        duration = max(duration, t_free)

    trace = MobilityTrace(duration if duration > 0 else 1.0)
    for node in nodes:
        trace.add_node()
        for t, x, y, speed in replayed[node]:
            trace.append(node, t, x, y, speed)
    return trace
