"""Deterministic discrete-event MANET simulator: DSDV routing evaluated under
random waypoint, group (RPGM), Gauss-Markov and Manhattan mobility."""

from .engine import RngStream, Simulator
from .mobility import (
    Field,
    GaussMarkovConfig,
    ManhattanConfig,
    MobilityTrace,
    RpgmConfig,
    RwpConfig,
    Velocity,
    gm_advance,
    gm_generate,
    gm_update,
    manhattan_generate,
    manhattan_turn,
    rpgm_generate,
    rpgm_member_velocity,
    rwp_generate,
    trace_position,
)
from .radio import Frame, Radio, RadioConfig, neighbors
from .dsdv import DsdvConfig, DsdvNode, RouteEntry, UpdateMessage, UNREACHABLE, route_preferred
from .traffic import CbrConfig, Packet, generate_pairs, schedule_cbr
from .metrics import RunResult, aggregate_over_speeds, compute_avg_delay, compute_pdf
from .ns2 import export_ns2_trace, import_ns2_trace
from .scenario import MODELS, ScenarioConfig, build_trace, run_scenario, simulate
from .sweep import SweepSpec, emit_plot_data, results_to_csv, run_sweep

__version__ = "0.1.0"
