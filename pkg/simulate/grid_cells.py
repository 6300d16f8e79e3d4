#!/usr/bin/env python3
"""
Grid expansion and seed derivation for the Monte Carlo harness.

A grid is a list of blocks; each block is the product of its axes. Every cell
gets a seed hashed from the master seed and its own coordinates, so a cell's
numbers do not depend on which other cells exist or on the order they run in.
"""
import hashlib
import itertools
import json
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

from estimate.errors import GridError
from simulate.copula_sim import CopulaFamily, MarginSpec, ScenarioSpec

DEFAULT_SETTINGS = {
    "replications": 1000,
    "alpha": 0.05,
    "B": 1000,
    "multipliers": "iid",
    "bandwidth": None,
    "derivative_scaling": "printed",
    "statistics": ["S_nm"],
    "margin_before": {"mean": 2.0, "sd": 1.0},
    "margin_after": {"mean": 0.0, "sd": 1.0},
}


@dataclass(frozen=True)
class GridCell:
    """Coordinates of one grid point; tau_after == tau_before when the copula does not change"""

    n: int
    d: int
    family: str
    tau_before: float
    tau_after: float
    b: float
    t: float = 1.0
    mode: str = "iid"

    def coordinates(self) -> Dict:
        return asdict(self)

    def scenario(self, margin_before: MarginSpec, margin_after: MarginSpec) -> ScenarioSpec:
        return ScenarioSpec(
            n=self.n,
            d=self.d,
            copula_before=CopulaFamily.from_tau(self.family, self.tau_before),
            copula_after=CopulaFamily.from_tau(self.family, self.tau_after),
            t=self.t,
            b=self.b,
            margin_before=margin_before,
            margin_after=margin_after,
            mode=self.mode,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    """One grid cell together with everything needed to run it"""

    cell: GridCell
    replications: int = 1000
    alpha: float = 0.05
    B: int = 1000
    multipliers: str = "iid"
    bandwidth: Optional[int] = None
    derivative_scaling: str = "printed"
    statistics: Tuple[str, ...] = ("S_nm",)
    master_seed: int = 0
    margin_before: MarginSpec = field(default_factory=lambda: MarginSpec(2.0, 1.0))
    margin_after: MarginSpec = field(default_factory=MarginSpec)

    def __post_init__(self):
        if self.replications < 1:
            raise GridError(f"replications must be at least 1, got {self.replications}")
        if not 0.0 < self.alpha <= 1.0:
            raise GridError(f"level must be in (0, 1], got {self.alpha}")
        if not self.statistics:
            raise GridError("at least one statistic is required")

    @property
    def seed(self) -> int:
        return cell_seed(self.master_seed, self.cell)

    def scenario(self) -> ScenarioSpec:
        return self.cell.scenario(self.margin_before, self.margin_after)


def _digest(payload: Dict) -> int:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return int.from_bytes(hashlib.sha256(canonical.encode("utf-8")).digest()[:8], "big")


def cell_seed(master_seed: int, cell: GridCell) -> int:
    """Stable 64-bit seed of (master seed, cell coordinates)"""
    return _digest({"master_seed": master_seed, "cell": cell.coordinates()})


def replicate_seed(seed: int, replicate: int, purpose: str) -> int:
    """Seed of one replicate's data ("data") or multiplier ("bootstrap") stream"""
    return _digest({"seed": seed, "replicate": replicate, "purpose": purpose})


def _settings(grid: Dict, block: Dict) -> Dict:
    merged = dict(DEFAULT_SETTINGS)
    merged.update({key: grid[key] for key in DEFAULT_SETTINGS if key in grid})
    merged.update({key: block[key] for key in DEFAULT_SETTINGS if key in block})
    return merged


def expand_grid(grid: Dict) -> List[ExperimentConfig]:
    """
    All cells of a parsed grid, block by block, axes varying in the order
    n, d, t, tau_before, tau_after, family, b, mode (the last one fastest).
    A block without tau_after keeps the copula fixed (tau_after = tau_before).
    """
    configs = []
    seen = set()
    for block in grid.get("blocks", []):
        settings = _settings(grid, block)
        axes = {
            "n": block["n"],
            "d": block["d"],
            "t": block.get("t", [1.0]),
            "tau_before": block["tau_before"],
            "tau_after": block.get("tau_after", [None]),
            "family": block["family"],
            "b": block["b"],
            "mode": block.get("mode", ["iid"]),
        }
        for n, d, t, tau_before, tau_after, family, b, mode in itertools.product(*axes.values()):
            cell = GridCell(
                n=int(n),
                d=int(d),
                family=family,
                tau_before=float(tau_before),
                tau_after=float(tau_before if tau_after is None else tau_after),
                b=float(b),
                t=float(t),
                mode=mode,
            )
            if cell in seen:
                raise GridError(f"cell {cell.coordinates()} appears twice in grid '{grid.get('name', '?')}'")
            seen.add(cell)
            configs.append(
                ExperimentConfig(
                    cell=cell,
                    replications=settings["replications"],
                    alpha=settings["alpha"],
                    B=settings["B"],
                    multipliers=settings["multipliers"],
                    bandwidth=settings["bandwidth"],
                    derivative_scaling=settings["derivative_scaling"],
                    statistics=tuple(settings["statistics"]),
                    master_seed=int(grid.get("seed", 0)),
                    margin_before=MarginSpec(**settings["margin_before"]),
                    margin_after=MarginSpec(**settings["margin_after"]),
                )
            )
    return configs
