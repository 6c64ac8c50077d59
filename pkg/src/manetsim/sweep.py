"""Experiment grid: models x speeds x loads x seeds, CSV output, plot data.

Cells are independent, so execution order never changes the output: rows are
assembled in sorted (model, speed, load, seed) order and every row carries the
hash of its full scenario config, making any single cell re-runnable.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from multiprocessing import get_context
from pathlib import Path
from typing import Optional

from .metrics import RunResult, config_hash
from .scenario import MODELS, ScenarioConfig, run_scenario

CSV_HEADER = (
    "model,speed,load,seed,originated,delivered,pdf,avg_delay_s,"
    "drops_noroute,drops_queue,drops_ttl,config_hash"
)

DEFAULT_SPEEDS = (5.0, 10.0, 15.0, 20.0, 25.0)
DEFAULT_LOADS = (4.0, 8.0, 12.0, 16.0)
DEFAULT_SEEDS = (1, 2, 3)


@dataclass
class SweepSpec:
    models: tuple = MODELS
    speeds: tuple = DEFAULT_SPEEDS
    loads: tuple = DEFAULT_LOADS
    seeds: tuple = DEFAULT_SEEDS
    base: ScenarioConfig = field(default_factory=ScenarioConfig)

    def __post_init__(self):
        if not (self.models and self.speeds and self.loads and self.seeds):
            raise ValueError("all sweep axes must be non-empty")
        for m in self.models:
            if m not in MODELS:
                raise ValueError(f"unknown model {m!r}")

    def cells(self) -> list[ScenarioConfig]:
        out = []
        for model in self.models:
            for speed in self.speeds:
                for load in self.loads:
                    for seed in self.seeds:
                        out.append(
                            dataclasses.replace(
                                self.base, model=model, v_max=speed, load=load, seed=seed
                            )
                        )
        return out


@dataclass
class CellFailure:
    model: str
    speed: float
    load: float
    seed: int
    error: str


def _run_cell(cfg: ScenarioConfig):
    try:
        return run_scenario(cfg)
    except Exception as exc:  # a failed cell must not kill the sweep
        return CellFailure(cfg.model, cfg.v_max, cfg.load, cfg.seed, f"{type(exc).__name__}: {exc}")


def run_sweep(spec: SweepSpec, workers: int = 1) -> tuple[list[RunResult], list[CellFailure]]:
    """Run every cell; failures are recorded, not fatal."""
    cells = spec.cells()
    if workers > 1:
        with get_context("fork").Pool(workers) as pool:
            outcomes = pool.map(_run_cell, cells)
    else:
        outcomes = [_run_cell(cfg) for cfg in cells]
    results = [o for o in outcomes if isinstance(o, RunResult)]
    failures = [o for o in outcomes if isinstance(o, CellFailure)]
    return results, failures


def _fmt_num(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return repr(x)


def _row(
    model: str, speed, load, seed, originated, delivered, pdf, delay,
    noroute, queue, ttl, chash: str,
) -> str:
    cols = [
        model, _fmt_num(speed), _fmt_num(load), str(seed), _fmt_num(originated),
        _fmt_num(delivered), _fmt_num(pdf), _fmt_num(delay), _fmt_num(noroute),
        _fmt_num(queue), _fmt_num(ttl), chash,
    ]
    return ",".join(cols)


def results_to_csv(results: list[RunResult], spec: Optional[SweepSpec] = None) -> str:
    """Cell rows sorted by (model, speed, load, seed), then seed-averaged rows.

    Averaged rows use seed="avg" and arithmetic means over the cell rows in
    ascending seed order; their config hash is the hash of the seedless cell.
    """
    lines = [CSV_HEADER]
    ordered = sorted(results, key=lambda r: (r.model, r.speed, r.load, r.seed))
    for r in ordered:
        lines.append(
            _row(
                r.model, r.speed, r.load, r.seed, r.originated, r.delivered,
                r.pdf, r.avg_delay, r.drops_noroute, r.drops_queue, r.drops_ttl,
                r.config_hash,
            )
        )
    groups: dict[tuple, list[RunResult]] = {}
    for r in ordered:
        groups.setdefault((r.model, r.speed, r.load), []).append(r)
    for (model, speed, load), rs in sorted(groups.items()):
        n = len(rs)
        mean = lambda vals: sum(vals) / n
        delays = [r.avg_delay for r in rs]
        mean_delay = mean(delays) if all(d is not None for d in delays) else None
        if spec is not None:
            cell_cfg = dataclasses.replace(spec.base, model=model, v_max=speed, load=load)
            cfg_dict = cell_cfg.to_dict()
            cfg_dict["seed"] = list(spec.seeds)
            chash = config_hash(cfg_dict)
        else:
            chash = "avg"
        lines.append(
            _row(
                model, speed, load, "avg",
                mean([r.originated for r in rs]), mean([r.delivered for r in rs]),
                mean([r.pdf for r in rs]), mean_delay,
                mean([r.drops_noroute for r in rs]), mean([r.drops_queue for r in rs]),
                mean([r.drops_ttl for r in rs]), chash,
            )
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Plot data


@dataclass
class CsvRow:
    model: str
    speed: float
    load: float
    seed: str
    pdf: float
    avg_delay: Optional[float]


def parse_csv(text: str) -> list[CsvRow]:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("unrecognized CSV header")
    rows = []
    for ln in lines[1:]:
        cols = ln.split(",")
        delay = None if cols[7] == "nan" else float(cols[7])
        rows.append(
            CsvRow(cols[0], float(cols[1]), float(cols[2]), cols[3], float(cols[6]), delay)
        )
    return rows


def emit_plot_data(csv_text: str, outdir) -> list[str]:
    """Write per-figure data files from a complete sweep CSV.

    One tab-separated file per (load, metric) with speed on x and one column
    per model, plus two load-vs-average summary files for the model with the
    best overall PDF (the delay summary is marked for log-scale rendering).
    Raises ValueError with the list of missing cells if the grid is incomplete.
    """
    rows = [r for r in parse_csv(csv_text) if r.seed == "avg"]
    if not rows:
        raise ValueError("CSV holds no seed-averaged rows")
    models = sorted({r.model for r in rows})
    speeds = sorted({r.speed for r in rows})
    loads = sorted({r.load for r in rows})
    cell = {(r.model, r.speed, r.load): r for r in rows}
    gaps = [
        (m, s, l)
        for m in models
        for s in speeds
        for l in loads
        if (m, s, l) not in cell
    ]
    if gaps:
        raise ValueError(f"incomplete sweep grid, missing cells: {gaps}")

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    def fnum(load):
        return int(load) if float(load).is_integer() else load

    for load in loads:
        for metric in ("pdf", "delay"):
            name = f"fig_load{fnum(load)}_{metric}.tsv"
            lines = ["speed\t" + "\t".join(models)]
            for s in speeds:
                vals = []
                for m in models:
                    r = cell[(m, s, load)]
                    v = r.pdf if metric == "pdf" else r.avg_delay
                    vals.append(_fmt_num(v))
                lines.append("\t".join([_fmt_num(s)] + vals))
            (outdir / name).write_text("\n".join(lines) + "\n")
            written.append(name)

    # overall best model by speed- and load-averaged PDF
    best = max(models, key=lambda m: sum(cell[(m, s, l)].pdf for s in speeds for l in loads))
    for metric in ("pdf", "delay"):
        name = f"summary_{metric}_vs_load.tsv"
        lines = [f"# model: {best}"]
        if metric == "delay":
            lines.append("# yscale: log")
        lines.append("load\t" + metric)
        for load in loads:
            vals = [
                (cell[(best, s, load)].pdf if metric == "pdf" else cell[(best, s, load)].avg_delay)
                for s in speeds
            ]
            lines.append(f"{_fmt_num(load)}\t{_fmt_num(sum(vals) / len(vals))}")
        (outdir / name).write_text("\n".join(lines) + "\n")
        written.append(name)
    return written
