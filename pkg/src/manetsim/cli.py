"""Command-line surface: simulate one cell, sweep the grid, move traces around.

A JSON config file (--config) supplies ScenarioConfig fields and wins over
individual flags.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .engine import RngStream
from .ns2 import export_ns2_trace, import_ns2_trace
from .scenario import MODELS, ScenarioConfig, build_trace, simulate
from .sweep import SweepSpec, emit_plot_data, results_to_csv, run_sweep


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=MODELS, default="rwp")
    p.add_argument("--nodes", type=int, default=100, dest="n_nodes")
    p.add_argument("--field-width", type=float, default=500.0)
    p.add_argument("--field-height", type=float, default=500.0)
    p.add_argument("--duration", type=float, default=100.0)
    p.add_argument("--pause", type=float, default=10.0)
    p.add_argument("--v-max", type=float, default=5.0)
    p.add_argument("--load", type=float, default=4.0)
    p.add_argument("--pair-count", type=int, default=10)
    p.add_argument("--packet-size", type=int, default=350)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--gm-alpha", type=float, default=0.75)
    p.add_argument("--config", type=Path, default=None,
                   help="JSON file of ScenarioConfig fields; overrides flags")


def _scenario_from_args(args) -> ScenarioConfig:
    cfg = ScenarioConfig(
        model=args.model,
        n_nodes=args.n_nodes,
        field_width=args.field_width,
        field_height=args.field_height,
        duration=args.duration,
        pause=args.pause,
        v_max=args.v_max,
        load=args.load,
        pair_count=args.pair_count,
        packet_size=args.packet_size,
        seed=args.seed,
        gm_alpha=args.gm_alpha,
    )
    if args.config is not None:
        overrides = json.loads(args.config.read_text())
        valid = {f.name for f in dataclasses.fields(ScenarioConfig)}
        unknown = set(overrides) - valid
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg


def _cmd_simulate(args) -> int:
    cfg = _scenario_from_args(args)
    result, sim = simulate(cfg, log_events=args.dump_events is not None)
    print(result.to_json())
    if args.dump_events is not None:
        args.dump_events.write_text(sim.sim.dump_event_log() + "\n")
    return 0


def _cmd_sweep(args) -> int:
    spec = SweepSpec(
        models=tuple(args.models),
        speeds=tuple(args.speeds),
        loads=tuple(args.loads),
        seeds=tuple(args.seeds),
    )
    results, failures = run_sweep(spec, workers=args.workers)
    csv_text = results_to_csv(results, spec)
    if args.out:
        args.out.write_text(csv_text)
        print(f"wrote {args.out} ({len(results)} cells, {len(failures)} failed)")
    else:
        sys.stdout.write(csv_text)
    for f in failures:
        print(
            f"FAILED cell model={f.model} speed={f.speed} load={f.load} seed={f.seed}: {f.error}",
            file=sys.stderr,
        )
    return 1 if failures else 0


def _cmd_trace(args) -> int:
    if args.trace_cmd == "gen":
        cfg = _scenario_from_args(args)
        trace = build_trace(cfg, RngStream(cfg.seed, "mobility"))
        text = export_ns2_trace(trace)
        if args.out:
            args.out.write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    trace = import_ns2_trace(args.infile.read_text())
    if args.trace_cmd == "import":
        waypoints = sum(len(trace.waypoints(i)) for i in range(trace.n_nodes))
        print(
            f"nodes={trace.n_nodes} duration={trace.duration:.6f} waypoints={waypoints}"
        )
        return 0
    # export: canonical re-emission of an imported file
    text = export_ns2_trace(trace)
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_plotdata(args) -> int:
    written = emit_plot_data(args.csv.read_text(), args.outdir)
    print(f"wrote {len(written)} files to {args.outdir}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="manetsim",
        description="DSDV over four mobility models: deterministic MANET simulation",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_sim = sub.add_parser("simulate", help="run one scenario cell")
    _add_scenario_flags(p_sim)
    p_sim.add_argument("--dump-events", type=Path, default=None,
                       help="write the dispatched-event log to this file")
    p_sim.set_defaults(fn=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run the full experiment grid")
    p_sweep.add_argument("--models", nargs="+", default=list(MODELS))
    p_sweep.add_argument("--speeds", nargs="+", type=float, default=[5, 10, 15, 20, 25])
    p_sweep.add_argument("--loads", nargs="+", type=float, default=[4, 8, 12, 16])
    p_sweep.add_argument("--seeds", nargs="+", type=int, default=[1, 2, 3])
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--out", type=Path, default=None)
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_trace = sub.add_parser("trace", help="generate or convert NS-2 movement traces")
    trace_sub = p_trace.add_subparsers(dest="trace_cmd", required=True)
    p_gen = trace_sub.add_parser("gen", help="generate a trace, emit NS-2 format")
    _add_scenario_flags(p_gen)
    p_gen.add_argument("--out", type=Path, default=None)
    p_gen.set_defaults(fn=_cmd_trace)
    p_imp = trace_sub.add_parser("import", help="parse an NS-2 movement file")
    p_imp.add_argument("--in", dest="infile", type=Path, required=True)
    p_imp.set_defaults(fn=_cmd_trace)
    p_exp = trace_sub.add_parser("export", help="re-emit an NS-2 file canonically")
    p_exp.add_argument("--in", dest="infile", type=Path, required=True)
    p_exp.add_argument("--out", type=Path, default=None)
    p_exp.set_defaults(fn=_cmd_trace)

    p_plot = sub.add_parser("plotdata", help="emit per-figure data files from a sweep CSV")
    p_plot.add_argument("--csv", type=Path, required=True)
    p_plot.add_argument("--outdir", type=Path, required=True)
    p_plot.set_defaults(fn=_cmd_plotdata)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
