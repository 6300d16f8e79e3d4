#!/usr/bin/env python3
"""
Monte Carlo harness: rejection percentages of the break test over a grid.

Each replicate generates one sample and runs every requested statistic on
it (S_nm with the cell's marginal break, S_n without breaks) against the
same multipliers. Replicates run in a thread pool and are collected by
index; the CSV is rewritten in grid order after every run, so --resume and
any thread count give the same file.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from rich.console import Console
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn

from bootstrap.multiplier_bootstrap import bootstrap_test
from bootstrap.multipliers import MultiplierConfig
from estimate.errors import GridError, ReplicateError
from estimate.types import BreakSpec
from simulate.copula_sim import generate_scenario
from simulate.grid_cells import ExperimentConfig, GridCell, expand_grid, replicate_seed

logger = logging.getLogger(__name__)
console = Console()

CSV_COLUMNS = [
    "n", "d", "family", "tau_before", "tau_after", "b", "t", "mode",
    "stat", "reject_pct", "se_pct", "reps", "B", "seed",
]
KEY_COLUMNS = CSV_COLUMNS[:9]


def _fmt(value: float) -> str:
    return f"{value:g}"


@dataclass(frozen=True)
class TableRow:
    """Rejection percentage and its Monte Carlo standard error for each statistic of one cell"""

    cell: GridCell
    reps: int
    B: int
    seed: int
    rejections: Dict[str, int] = field(default_factory=dict)

    def reject_pct(self, stat: str) -> float:
        return 100.0 * self.rejections[stat] / self.reps

    def se_pct(self, stat: str) -> float:
        p = self.rejections[stat] / self.reps
        return 100.0 * math.sqrt(p * (1.0 - p) / self.reps)

    def csv_rows(self) -> List[Dict[str, str]]:
        c = self.cell
        rows = []
        for stat in self.rejections:
            rows.append({
                "n": str(c.n),
                "d": str(c.d),
                "family": c.family,
                "tau_before": _fmt(c.tau_before),
                "tau_after": _fmt(c.tau_after),
                "b": _fmt(c.b),
                "t": _fmt(c.t),
                "mode": c.mode,
                "stat": stat,
                "reject_pct": f"{self.reject_pct(stat):.2f}",
                "se_pct": f"{self.se_pct(stat):.2f}",
                "reps": str(self.reps),
                "B": str(self.B),
                "seed": str(self.seed),
            })
        return rows


def cell_key(cell: GridCell, stat: str) -> Tuple[str, ...]:
    return (
        str(cell.n), str(cell.d), cell.family, _fmt(cell.tau_before), _fmt(cell.tau_after),
        _fmt(cell.b), _fmt(cell.t), cell.mode, stat,
    )


def _break_spec(stat: str, cfg: ExperimentConfig) -> BreakSpec:
    n = cfg.cell.n
    if stat == "S_n":
        return BreakSpec.none(n)
    return BreakSpec.from_fractions([cfg.cell.b], n)


def run_replicate(cfg: ExperimentConfig, replicate: int) -> Dict[str, bool]:
    """Reject / keep for every statistic of one generated sample"""
    seed = cfg.seed
    rng = np.random.Generator(np.random.Philox(replicate_seed(seed, replicate, "data")))
    sample = generate_scenario(cfg.scenario(), rng)
    multipliers = MultiplierConfig(
        mode=cfg.multipliers,
        B=cfg.B,
        bandwidth=cfg.bandwidth,
        seed=replicate_seed(seed, replicate, "bootstrap"),
    )
    decisions = {}
    for stat in cfg.statistics:
        result = bootstrap_test(sample, _break_spec(stat, cfg), multipliers, cfg.derivative_scaling)
        decisions[stat] = result.p_value < cfg.alpha
    return decisions


def run_cell(
    cfg: ExperimentConfig,
    threads: Optional[int] = None,
    on_replicate: Optional[Callable[[], None]] = None,
) -> TableRow:
    """
    100 * (fraction of replicates with p-value < alpha) for each statistic.
    Failures are raised as ReplicateError carrying the replicate index.
    """
    decisions: List[Optional[Dict[str, bool]]] = [None] * cfg.replications

    def task(replicate):
        try:
            return run_replicate(cfg, replicate)
        except Exception as e:
            raise ReplicateError(replicate, e) from e

    workers = max(1, threads or 1)
    if workers == 1:
        for replicate in range(cfg.replications):
            decisions[replicate] = task(replicate)
            if on_replicate:
                on_replicate()
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(task, r): r for r in range(cfg.replications)}
            for future in as_completed(futures):
                decisions[futures[future]] = future.result()
                if on_replicate:
                    on_replicate()

    rejections = {stat: sum(1 for d in decisions if d[stat]) for stat in cfg.statistics}
    logger.info(
        "cell %s: %s",
        cfg.cell.coordinates(),
        ", ".join(f"{s}={100.0 * r / cfg.replications:.1f}%" for s, r in rejections.items()),
    )
    return TableRow(cell=cfg.cell, reps=cfg.replications, B=cfg.B, seed=cfg.seed, rejections=rejections)


def _read_existing(path: Path) -> pd.DataFrame:
    if not path.exists():
        return pd.DataFrame(columns=CSV_COLUMNS)
    existing = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = [c for c in CSV_COLUMNS if c not in existing.columns]
    if missing:
        raise GridError(f"cannot resume from '{path}': missing column(s) {', '.join(missing)}")
    return existing[CSV_COLUMNS]


class TableRunner:
    """
    Runs a grid into a CSV table and its aligned text rendering.

    Steps: plan (expand grid, drop cells already in the CSV when resuming),
    run the remaining cells, write CSV and .txt in grid order.
    """

    def __init__(self, grid: Dict, out_path: str, resume: bool = False, threads: Optional[int] = None,
                 show_progress: bool = True):
        self.grid = grid
        self.out_path = Path(out_path)
        self.resume = resume
        self.threads = threads
        self.show_progress = show_progress
        self.configs: List[ExperimentConfig] = []
        self.pending: List[ExperimentConfig] = []
        self.existing = pd.DataFrame(columns=CSV_COLUMNS)

    def plan(self):
        self.configs = expand_grid(self.grid)
        if self.resume:
            self.existing = _read_existing(self.out_path)
        done = {tuple(row) for row in self.existing[KEY_COLUMNS].itertuples(index=False)}
        self.pending = [
            cfg for cfg in self.configs
            if not all(cell_key(cfg.cell, stat) in done for stat in cfg.statistics)
        ]
        logger.info("grid '%s': %d cell(s), %d to run", self.grid.get("name", "?"), len(self.configs), len(self.pending))

    def run_cells(self) -> List[TableRow]:
        rows = []
        if not self.show_progress:
            for cfg in self.pending:
                rows.append(run_cell(cfg, self.threads))
            return rows

        columns = (SpinnerColumn(), TextColumn("{task.description}"), BarColumn(), TextColumn("{task.completed}/{task.total}"), TimeElapsedColumn())
        with Progress(*columns, console=console, transient=True) as progress:
            overall = progress.add_task("[cyan]cells[/cyan]", total=len(self.pending))
            for cfg in self.pending:
                c = cfg.cell
                label = f"n={c.n} d={c.d} {c.family} tau={_fmt(c.tau_before)}->{_fmt(c.tau_after)} b={_fmt(c.b)} t={_fmt(c.t)}"
                task = progress.add_task(f"[dim]{label}[/dim]", total=cfg.replications)
                rows.append(run_cell(cfg, self.threads, lambda: progress.advance(task)))
                progress.remove_task(task)
                progress.advance(overall)
        return rows

    def write(self, rows: List[TableRow]) -> pd.DataFrame:
        fresh = pd.DataFrame([r for row in rows for r in row.csv_rows()], columns=CSV_COLUMNS)
        fresh_keys = {tuple(r) for r in fresh[KEY_COLUMNS].itertuples(index=False)}
        mask = np.array([tuple(r) not in fresh_keys for r in self.existing[KEY_COLUMNS].itertuples(index=False)], dtype=bool)
        kept = self.existing.loc[mask]
        table = pd.concat([kept, fresh], ignore_index=True) if len(kept) else fresh

        order = {}
        for cfg in self.configs:
            for stat in cfg.statistics:
                order.setdefault(cell_key(cfg.cell, stat), len(order))
        position = [order.get(tuple(r), len(order) + i) for i, r in enumerate(table[KEY_COLUMNS].itertuples(index=False))]
        table = table.assign(_order=position).sort_values("_order", kind="stable").drop(columns="_order")
        table = table.reset_index(drop=True)

        self.out_path.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(self.out_path, index=False)
        text = table.to_string(index=False) if len(table) else " ".join(CSV_COLUMNS)
        self.out_path.with_suffix(".txt").write_text(text + "\n")
        return table

    def run(self) -> pd.DataFrame:
        if self.show_progress:
            console.print(Panel.fit(f"[bold cyan]Simulating grid '{self.grid.get('name', '?')}'[/bold cyan]", border_style="cyan"))
        self.plan()
        if self.show_progress and self.resume:
            console.print(f"[green]✓[/green] {len(self.configs) - len(self.pending)} cell(s) already in {self.out_path}")
        rows = self.run_cells()
        table = self.write(rows)
        if self.show_progress:
            console.print(f"[green]✓[/green] Wrote {len(table)} row(s) to {self.out_path}")
        return table


def run_table(grid: Dict, out_path: str, resume: bool = False, threads: Optional[int] = None,
              show_progress: bool = False) -> pd.DataFrame:
    """Run every cell of grid and write out_path (CSV) and out_path.txt"""
    try:
        return TableRunner(grid, out_path, resume, threads, show_progress).run()
    except OSError as e:
        raise GridError(f"cannot write '{out_path}': {e}") from e
