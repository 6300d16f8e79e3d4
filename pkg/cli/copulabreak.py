#!/usr/bin/env python3
"""
Copula break test with known marginal breaks
Tests a CSV matrix for a change in its copula, and runs the Monte Carlo grids
"""
import json
import logging
import secrets
import sys
from pathlib import Path
from typing import Dict, List, Optional

ROOT_DIR = Path(__file__).resolve().parent.parent
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))

import numpy as np
import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from bootstrap.multiplier_bootstrap import BootstrapResult, bootstrap_test
from bootstrap.multipliers import MultiplierConfig
from configs.test_config_manager import TestConfigManager
from estimate.errors import CopulaBreakError, GridError
from estimate.marginal_check import check_marginal_breaks
from estimate.types import BreakSpec
from simulate.copula_sim import CopulaFamily, empirical_kendall_tau, sample_copula
from simulate.grid_cells import expand_grid
from simulate.mc_harness import run_table
from validate.dataset_schema import InputDataset, parse_breaks, validate_dataset_file
from validate.grid_schema import validate_grid_file

EXIT_OK = 0
EXIT_REJECT = 10
EXIT_INVALID = 11
EXIT_LIBRARY = 12
EXIT_UNEXPECTED = 13
EXIT_INTERRUPTED = 130

GRID_DIR = ROOT_DIR / "grids"

app = typer.Typer(help="Copula break test with known marginal breaks", no_args_is_help=True)
config_app = typer.Typer(help="Manage test profiles", no_args_is_help=True)
app.add_typer(config_app, name="config")
console = Console()
logger = logging.getLogger("copulabreak")


def setup_logging(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def fail(errors: List[str], code: int):
    console.print("\n[red]Error:[/red]")
    for error in errors:
        console.print(f"  [red]•[/red] {error}")
    raise typer.Exit(code)


def display_result(result: BootstrapResult, dataset: InputDataset, settings: Dict, alpha: float):
    """Result and configuration tables"""
    console.print()
    table = Table(title="Result", show_header=True, header_style="bold", border_style="dim", title_style="bold")
    table.add_column("Quantity", style="cyan", no_wrap=True)
    table.add_column("Value", justify="right")
    name = "S_n" if not result.breaks else "S_n,m"
    table.add_row(f"Statistic {name}", f"{result.statistic:.6g}")
    table.add_row("p-value", f"{result.p_value:.4f}")
    argmax = str(result.argmax_k)
    label = dataset.label(result.argmax_k)
    if label:
        argmax += f" ({label})"
    table.add_row("Most likely copula break", argmax)
    table.add_row("Replicates B", str(result.B))
    console.print(table)

    console.print()
    table = Table(title="Configuration", show_header=True, header_style="bold", border_style="dim", title_style="bold")
    table.add_column("Setting", style="cyan", no_wrap=True)
    table.add_column("Value")
    breaks = ", ".join(str(m) for m in result.breaks) or "none"
    table.add_row("Input", f"{dataset.path} ({dataset.n} x {dataset.sample.d})")
    table.add_row("Marginal breaks", breaks)
    table.add_row("Multipliers", result.mode)
    table.add_row("Bandwidth", "-" if result.bandwidth is None else str(result.bandwidth))
    table.add_row("Derivative scaling", result.derivative_scaling)
    table.add_row("Alpha", f"{alpha:g}")
    table.add_row("Seed", str(result.seed))
    table.add_row("Threads", str(settings["threads"]))
    console.print(table)


def display_marginal_checks(dataset: InputDataset, spec: BreakSpec):
    checks = check_marginal_breaks(dataset.sample, spec)
    if not checks:
        return
    console.print()
    table = Table(title="Marginal breaks (two-sample Cramér–von Mises)", show_header=True, header_style="bold",
                  border_style="dim", title_style="bold")
    table.add_column("Break", justify="right", style="cyan")
    table.add_column("Column")
    table.add_column("Statistic", justify="right")
    table.add_column("p-value", justify="right")
    for check in checks:
        table.add_row(str(check.break_index), dataset.columns[check.column], f"{check.statistic:.4g}", f"{check.p_value:.4f}")
    console.print(table)


def result_json(result: BootstrapResult) -> Dict:
    return {
        "statistic": result.statistic,
        "p_value": result.p_value,
        "argmax_index": result.argmax_k,
        "B": result.B,
        "seed": result.seed,
        "breaks": list(result.breaks),
        "mode": result.mode,
        "bandwidth": result.bandwidth,
    }


@app.command()
def test(
    input_file: Path = typer.Option(..., "--input", "-i", help="CSV matrix, one observation per row"),
    breaks: Optional[str] = typer.Option(None, "--breaks", help="Known marginal breaks as 1-based indices, e.g. 202 or 50,120"),
    B: Optional[int] = typer.Option(None, "--B", help="Bootstrap replicates"),
    multipliers: Optional[str] = typer.Option(None, "--multipliers", help="iid or dependent"),
    bandwidth: Optional[int] = typer.Option(None, "--bandwidth", help="Dependent-multiplier bandwidth"),
    alpha: Optional[float] = typer.Option(None, "--alpha", help="Level of the test"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Random seed (generated and printed when omitted)"),
    threads: Optional[int] = typer.Option(None, "--threads", help="Worker threads"),
    derivative_scaling: Optional[str] = typer.Option(None, "--derivative-scaling", help="printed or standard"),
    date_column: Optional[str] = typer.Option(None, "--date-column", help="Name or index of a date column"),
    profile: Optional[str] = typer.Option(None, "--profile", help="Profile to take defaults from"),
    json_output: bool = typer.Option(False, "--json/--no-json", help="Print the result as JSON"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Also write the JSON result to this file"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
):
    """Test a CSV matrix for a copula break given its known marginal breaks"""
    setup_logging(verbose)
    try:
        mgr = TestConfigManager()
        mgr.load_config()
        if profile and (not mgr.config or profile not in mgr.config["profiles"]):
            fail([f"Profile '{profile}' not found"], EXIT_INVALID)
        settings = mgr.resolve(
            {
                "B": B,
                "multipliers": multipliers,
                "bandwidth": bandwidth,
                "alpha": alpha,
                "derivative_scaling": derivative_scaling,
                "threads": threads,
            },
            profile_name=profile,
        )

        is_valid, errors, dataset = validate_dataset_file(str(input_file), date_column)
        if not is_valid:
            fail(errors, EXIT_INVALID)
        break_list, errors = parse_breaks(breaks, dataset.n)
        if errors:
            fail(errors, EXIT_INVALID)
        if not 0.0 < settings["alpha"] <= 1.0:
            fail([f"alpha must be in (0, 1], got {settings['alpha']}"], EXIT_INVALID)

        if seed is None:
            seed = secrets.randbits(63)
            if not json_output:
                console.print(f"[yellow]![/yellow] No seed given, using generated seed {seed}")

        spec = BreakSpec(break_list, dataset.n)
        cfg = MultiplierConfig(
            mode=settings["multipliers"],
            B=settings["B"],
            bandwidth=settings["bandwidth"],
            seed=seed,
        )

        if not json_output:
            console.print()
            console.print(Panel.fit(
                f"[bold cyan]Copula break test[/bold cyan]\n[dim]{input_file} · breaks: {breaks or 'none'}[/dim]",
                border_style="cyan",
            ))
            with console.status("[dim]Running multiplier bootstrap...[/dim]", spinner="dots"):
                result = bootstrap_test(dataset.sample, spec, cfg, settings["derivative_scaling"], settings["threads"])
        else:
            result = bootstrap_test(dataset.sample, spec, cfg, settings["derivative_scaling"], settings["threads"])

        payload = result_json(result)
        if output:
            output.write_text(json.dumps(payload, indent=2) + "\n")
        if json_output:
            typer.echo(json.dumps(payload, indent=2))
        else:
            display_result(result, dataset, settings, settings["alpha"])
            display_marginal_checks(dataset, spec)
            console.print()
            if result.rejects(settings["alpha"]):
                console.print(f"[red]✗[/red] Copula break detected at level {settings['alpha']:g} (p-value {result.p_value:.4f})")
            else:
                console.print(f"[green]✓[/green] No copula break at level {settings['alpha']:g} (p-value {result.p_value:.4f})")
            if output:
                console.print(f"[green]Saved:[/green] {output}")

        raise typer.Exit(EXIT_REJECT if result.rejects(settings["alpha"]) else EXIT_OK)

    except typer.Exit:
        raise
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted[/yellow]")
        raise typer.Exit(EXIT_INTERRUPTED)
    except CopulaBreakError as e:
        fail([str(e)], EXIT_LIBRARY)
    except Exception as e:
        logger.exception("unexpected failure")
        fail([f"Unexpected error: {e}"], EXIT_UNEXPECTED)


@app.command()
def simulate(
    grid: Path = typer.Option(..., "--grid", "-g", help="Grid file (JSON)"),
    out: Path = typer.Option(..., "--out", "-o", help="Output CSV; an aligned .txt table is written next to it"),
    resume: bool = typer.Option(False, "--resume", help="Skip cells already present in the output CSV"),
    threads: int = typer.Option(1, "--threads", help="Worker threads per cell"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="No progress display"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
):
    """Run a Monte Carlo grid into a rejection-percentage table"""
    setup_logging(verbose)
    is_valid, errors = validate_grid_file(str(grid))
    if not is_valid:
        fail(errors, EXIT_INVALID)
    try:
        data = json.loads(grid.read_text())
        run_table(data, str(out), resume=resume, threads=threads, show_progress=not quiet)
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted[/yellow]")
        raise typer.Exit(EXIT_INTERRUPTED)
    except GridError as e:
        fail([str(e)], EXIT_INVALID)
    except CopulaBreakError as e:
        fail([str(e)], EXIT_LIBRARY)
    except Exception as e:
        logger.exception("unexpected failure")
        fail([f"Unexpected error: {e}"], EXIT_UNEXPECTED)


@app.command()
def grids(
    calibrate: bool = typer.Option(False, "--calibrate", help="Print Monte Carlo Kendall tau for each family and tau"),
    samples: int = typer.Option(20000, "--samples", help="Draws per calibration point"),
    seed: int = typer.Option(0, "--seed", help="Calibration seed"),
):
    """List the bundled grids"""
    table = Table(title="Bundled grids", show_header=True, header_style="bold", border_style="dim", title_style="bold")
    table.add_column("Grid", style="cyan", no_wrap=True)
    table.add_column("Cells", justify="right", no_wrap=True)
    table.add_column("Description")
    taus = set()
    for path in sorted(GRID_DIR.glob("*.grid")):
        is_valid, errors = validate_grid_file(str(path))
        if not is_valid:
            table.add_row(path.name, "-", f"[red]invalid: {errors[0]}[/red]")
            continue
        data = json.loads(path.read_text())
        configs = expand_grid(data)
        for cfg in configs:
            taus.add((cfg.cell.family, cfg.cell.tau_before))
            taus.add((cfg.cell.family, cfg.cell.tau_after))
        table.add_row(path.name, str(len(configs)), data.get("description", ""))
    console.print(table)

    if not calibrate:
        return
    console.print()
    table = Table(title=f"Kendall tau calibration ({samples} draws, d = 2)", show_header=True, header_style="bold",
                  border_style="dim", title_style="bold")
    table.add_column("Family", style="cyan")
    table.add_column("Target tau", justify="right")
    table.add_column("Theta", justify="right")
    table.add_column("Empirical tau", justify="right")
    rng = np.random.Generator(np.random.Philox(seed))
    for family, tau in sorted(taus):
        copula = CopulaFamily.from_tau(family, tau)
        draws = sample_copula(copula, 2, samples, rng)
        table.add_row(family, f"{tau:g}", f"{copula.theta:.4g}", f"{empirical_kendall_tau(draws):.4f}")
    console.print(table)


@config_app.command("list")
def config_list():
    """List test profiles"""
    mgr = TestConfigManager()
    mgr.load_config()
    mgr.list_profiles()


@config_app.command("switch")
def config_switch(profile: str = typer.Argument(..., help="Profile name")):
    """Make a profile the active one"""
    mgr = TestConfigManager()
    mgr.load_config()
    if not mgr.switch_profile(profile):
        raise typer.Exit(EXIT_INVALID)


@config_app.command("show")
def config_show(profile: Optional[str] = typer.Argument(None, help="Profile name (default: active)")):
    """Print the effective settings of a profile"""
    mgr = TestConfigManager()
    mgr.load_config()
    typer.echo(json.dumps(mgr.resolve(profile_name=profile), indent=2))


@config_app.command("add")
def config_add(
    profile: str = typer.Argument(..., help="Profile name"),
    B: Optional[int] = typer.Option(None, "--B"),
    multipliers: Optional[str] = typer.Option(None, "--multipliers"),
    bandwidth: Optional[int] = typer.Option(None, "--bandwidth"),
    alpha: Optional[float] = typer.Option(None, "--alpha"),
    derivative_scaling: Optional[str] = typer.Option(None, "--derivative-scaling"),
    threads: Optional[int] = typer.Option(None, "--threads"),
    activate: bool = typer.Option(False, "--activate", help="Also make it the active profile"),
):
    """Save a profile from flags (unset flags fall back to the built-in defaults)"""
    mgr = TestConfigManager()
    mgr.load_config()
    settings = mgr.resolve(
        {"B": B, "multipliers": multipliers, "bandwidth": bandwidth, "alpha": alpha,
         "derivative_scaling": derivative_scaling, "threads": threads},
        profile_name="__none__",
    )
    if not mgr.add_profile(profile, settings, activate):
        raise typer.Exit(EXIT_INVALID)


if __name__ == "__main__":
    app()
