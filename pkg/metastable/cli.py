"""
Command-line front end.

Subcommands:
    analyze             plateaux, full hierarchy and classification diagnostics
    kawasaki            enumerate the lattice-gas landscape, optionally analyse it
    verify-exit         exit law of a cycle against the finite-beta solves
    verify-resolvent    resolvent condition on one level
    verify-occupation   time outside the valleys and first-hit splits
    simulate            one seeded trajectory

Exit codes: 0 success, 1 failed check, 2 input error.
"""

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Optional, Sequence

import click
import typer
import yaml
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from metastable.config import apply_overrides, load_config
from metastable.core.errors import ClassificationViolation, InputError, MetastableError
from metastable.core.hierarchy import HierarchyReport, full_hierarchy
from metastable.core.kawasaki import KawasakiParams, enumerate_omega_bar
from metastable.core.landscape import Landscape, load_landscape, save_landscape
from metastable.core.markov_verify import simulate as simulate_trajectory
from metastable.core.plateaux import validate_cycle
from metastable.core.report_io import dumps, write_json
from metastable.models import CheckRecord, RunConfig
from metastable.suites import (
    exit_suite,
    hierarchy_checks,
    hierarchy_document,
    occupation_suite,
    parse_states,
    resolvent_suite,
    verification_document,
)

logger = logging.getLogger(__name__)
console = Console()

app = typer.Typer(
    name="metastable",
    help="Metastable hierarchy of Metropolis dynamics on finite energy landscapes.",
    no_args_is_help=True,
    add_completion=False,
)

EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2


def _setup_logging(level: str) -> None:
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    logging.getLogger().setLevel(level)


@contextmanager
def _guard():
    """Map library errors onto exit codes."""
    try:
        yield
    except ClassificationViolation as e:
        console.print(f"[red]Classification failed:[/red] {e}")
        raise typer.Exit(EXIT_CHECK_FAILED)
    except (InputError, FileNotFoundError, ValidationError) as e:
        console.print(f"[red]Input error:[/red] {e}")
        raise typer.Exit(EXIT_INPUT_ERROR)
    except MetastableError as e:
        console.print(f"[red]Analysis error:[/red] {e}")
        raise typer.Exit(EXIT_CHECK_FAILED)


def _parse_grid(text: Optional[str]) -> Optional[list[float]]:
    if text is None:
        return None
    try:
        grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise typer.BadParameter(f"Expected comma-separated numbers, got {text!r}")
    if not grid:
        raise typer.BadParameter("Beta grid is empty")
    return grid


def _settings(ctx: typer.Context) -> dict[str, Any]:
    return ctx.obj["config"]


def _resolved(ctx: typer.Context, run: RunConfig) -> dict[str, Any]:
    return {"settings": _settings(ctx), "run": run.model_dump(mode="json")}


def _load(ctx: typer.Context, path: Path) -> Landscape:
    return load_landscape(path, state_cap=_settings(ctx)["analysis"]["state_cap"])


def _hierarchy(ctx: typer.Context, L: Landscape) -> HierarchyReport:
    analysis = _settings(ctx)["analysis"]
    return full_hierarchy(L, restrict=analysis["restrict_to_omega_bar"], exact=analysis["exact"], strict=False)


def _print_hierarchy(report: HierarchyReport) -> None:
    table = Table(title=f"Hierarchy: {report.landscape.n_states} states, {report.terminal} levels")
    table.add_column("h", justify="right")
    table.add_column("Γ*", justify="right")
    table.add_column("plateaux", justify="right")
    table.add_column("ν", justify="right")
    table.add_column("recurrent classes")
    table.add_column("transient")
    for level in report.levels:
        table.add_row(
            str(level.h),
            str(level.gamma_star),
            str(len(level.plateaux)),
            str(level.nu),
            " ".join(str(list(c)) for c in level.components),
            str(list(level.transient)),
        )
    console.print(table)


def _print_checks(title: str, checks: Sequence[CheckRecord]) -> None:
    table = Table(title=title)
    table.add_column("check")
    table.add_column("parameters")
    table.add_column("result")
    for record in checks:
        verdict = "[green]pass[/green]" if record.passed else "[red]FAIL[/red]"
        table.add_row(record.check, str(record.parameters), verdict)
    console.print(table)


def _finish(checks: Sequence[CheckRecord]) -> None:
    failed = [r for r in checks if not r.passed]
    if failed:
        console.print(f"[red]{len(failed)} of {len(checks)} checks failed[/red]")
        raise typer.Exit(EXIT_CHECK_FAILED)
    console.print(f"[green]All {len(checks)} checks passed[/green]")


def _analyse_and_report(ctx: typer.Context, L: Landscape, run: RunConfig) -> None:
    report = _hierarchy(ctx, L)
    _print_hierarchy(report)
    checks = hierarchy_checks(report, ctx.obj["check_log"])
    if run.report_path is not None:
        write_json(hierarchy_document(report, _resolved(ctx, run), checks), run.report_path)
    _finish(checks)


@app.callback()
def main(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="YAML configuration file"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", min=1, help="Parallel Monte Carlo workers"),
    check_log: Optional[Path] = typer.Option(None, "--check-log", help="Append each check to this JSONL file"),
):
    """Metastable hierarchy tools."""
    try:
        settings = load_config(str(config) if config else None)
        settings = apply_overrides(settings, {"runtime": {"jobs": jobs, "log_level": "DEBUG" if verbose else None}})
    except (FileNotFoundError, ValueError, yaml.YAMLError) as e:
        console.print(f"[red]Configuration error:[/red] {e}")
        raise typer.Exit(EXIT_INPUT_ERROR)
    _setup_logging(settings["runtime"]["log_level"])
    ctx.obj = {"config": settings, "check_log": check_log}


@app.command()
def analyze(
    ctx: typer.Context,
    landscape: Path = typer.Argument(..., help="Landscape JSON file"),
    report: Optional[Path] = typer.Option(None, "--report", "-o", help="Write the hierarchy report here"),
):
    """Stable plateaux, full hierarchy and classification diagnostics."""
    with _guard():
        settings = _settings(ctx)
        run = RunConfig(
            command="analyze",
            input_path=landscape,
            report_path=report,
            state_cap=settings["analysis"]["state_cap"],
            jobs=settings["runtime"]["jobs"],
        )
        _analyse_and_report(ctx, _load(ctx, landscape), run)


@app.command()
def kawasaki(
    ctx: typer.Context,
    K: Optional[int] = typer.Option(None, "--K", help="Torus columns"),
    L: Optional[int] = typer.Option(None, "--L", help="Torus rows"),
    N0: Optional[int] = typer.Option(None, "--N0", help="Strip width"),
    emit_landscape: Optional[Path] = typer.Option(None, "--emit-landscape", help="Write the enumerated landscape"),
    analyze_: bool = typer.Option(False, "--analyze", help="Run the full hierarchy"),
    report: Optional[Path] = typer.Option(None, "--report", "-o", help="Write the hierarchy report here"),
):
    """Enumerate the lattice-gas landscape below the tunneling barrier."""
    with _guard():
        settings = _settings(ctx)
        lattice = settings["kawasaki"]
        run = RunConfig(
            command="kawasaki",
            report_path=report,
            K=K if K is not None else lattice["K"],
            L=L if L is not None else lattice["L"],
            N0=N0 if N0 is not None else lattice["N0"],
            enumeration_cap=lattice["enumeration_cap"],
            jobs=settings["runtime"]["jobs"],
        )
        params = KawasakiParams(run.K, run.L, run.N0)
        landscape = enumerate_omega_bar(params, cap=run.enumeration_cap)
        console.print(
            f"K={params.K} L={params.L} N0={params.N0}: {landscape.n_states} states, "
            f"{len(landscape.ground_states())} ground states at {params.ground_energy}, "
            f"barrier {params.barrier}"
        )
        if emit_landscape is not None:
            save_landscape(landscape, emit_landscape)
        if analyze_:
            _analyse_and_report(ctx, landscape, run)


@app.command("verify-exit")
def verify_exit(
    ctx: typer.Context,
    landscape: Path = typer.Argument(..., help="Landscape JSON file"),
    cycle: str = typer.Option(..., "--cycle", help="Comma-separated state labels or ids"),
    beta_grid: Optional[str] = typer.Option(None, "--beta-grid", help="e.g. 5,10,20"),
    mc: Optional[int] = typer.Option(None, "--mc", min=0, help="Monte Carlo trajectories (0 disables)"),
    seed: Optional[int] = typer.Option(None, "--seed", min=0),
    report: Optional[Path] = typer.Option(None, "--report", "-o"),
):
    """Exit law of a cycle: limit formula, exact solves and Monte Carlo."""
    with _guard():
        settings = _settings(ctx)
        verification = settings["verification"]
        run = RunConfig(
            command="verify-exit",
            input_path=landscape,
            report_path=report,
            beta_grid=_parse_grid(beta_grid) or verification["beta_grid"],
            seed=seed if seed is not None else verification["seed"],
            trajectories=mc if mc else verification["trajectories"],
            state_cap=settings["analysis"]["state_cap"],
            jobs=settings["runtime"]["jobs"],
        )
        L = _load(ctx, landscape)
        C = validate_cycle(L, parse_states(L, cycle.split(",")))
        checks = exit_suite(
            L, C, run.beta_grid,
            tolerance=verification["exit_tolerance"],
            mc_runs=run.trajectories if mc is None or mc > 0 else 0,
            mc_beta=verification["mc_beta"],
            sigmas=verification["mc_sigmas"],
            seed=run.seed,
            batch_size=verification["batch_size"],
            jobs=run.jobs,
            dps=verification["precision_digits"],
            dense_limit=verification["dense_precision_limit"],
            log_path=ctx.obj["check_log"],
        )
        _print_checks("Exit distribution", checks)
        if report is not None:
            write_json(verification_document("exit", _resolved(ctx, run), checks).model_dump(mode="json", by_alias=True), report)
        _finish(checks)


@app.command("verify-resolvent")
def verify_resolvent(
    ctx: typer.Context,
    landscape: Path = typer.Argument(..., help="Landscape JSON file"),
    level: int = typer.Option(1, "--level", min=1),
    lam: float = typer.Option(1.0, "--lambda", help="Resolvent parameter, positive"),
    beta_grid: Optional[str] = typer.Option(None, "--beta-grid", help="e.g. 4,6,8"),
    report: Optional[Path] = typer.Option(None, "--report", "-o"),
):
    """Resolvent condition for the plateau indicators of one level."""
    with _guard():
        settings = _settings(ctx)
        verification = settings["verification"]
        run = RunConfig(
            command="verify-resolvent",
            input_path=landscape,
            report_path=report,
            beta_grid=_parse_grid(beta_grid) or verification["resolvent_beta_grid"],
            state_cap=settings["analysis"]["state_cap"],
            jobs=settings["runtime"]["jobs"],
        )
        hierarchy = _hierarchy(ctx, _load(ctx, landscape))
        checks = resolvent_suite(
            hierarchy.landscape,
            hierarchy.level(level),
            run.beta_grid,
            lam=lam,
            bound=verification["resolvent_bound"],
            dps=verification["precision_digits"],
            dense_limit=verification["dense_precision_limit"],
            log_path=ctx.obj["check_log"],
        )
        _print_checks(f"Resolvent, level {level}", checks)
        if report is not None:
            write_json(verification_document("resolvent", _resolved(ctx, run), checks).model_dump(mode="json", by_alias=True), report)
        _finish(checks)


@app.command("verify-occupation")
def verify_occupation(
    ctx: typer.Context,
    landscape: Path = typer.Argument(..., help="Landscape JSON file"),
    level: int = typer.Option(1, "--level", min=1),
    beta: Optional[float] = typer.Option(None, "--beta"),
    horizon: float = typer.Option(1.0, "--horizon", help="In units of e^(gamma* beta)"),
    runs: int = typer.Option(10_000, "--runs", min=1),
    split_runs: int = typer.Option(0, "--split-runs", min=0, help="First-hit split trajectories per plateau"),
    seed: Optional[int] = typer.Option(None, "--seed", min=0),
    report: Optional[Path] = typer.Option(None, "--report", "-o"),
):
    """Time outside the valleys and first-hit splits against the limit chain."""
    with _guard():
        settings = _settings(ctx)
        verification = settings["verification"]
        run = RunConfig(
            command="verify-occupation",
            input_path=landscape,
            report_path=report,
            beta_grid=[beta if beta is not None else verification["mc_beta"]],
            seed=seed if seed is not None else verification["seed"],
            trajectories=runs,
            state_cap=settings["analysis"]["state_cap"],
            jobs=settings["runtime"]["jobs"],
        )
        hierarchy = _hierarchy(ctx, _load(ctx, landscape))
        checks = occupation_suite(
            hierarchy.landscape,
            hierarchy.level(level),
            run.beta_grid[0],
            horizon=horizon,
            n_runs=runs,
            bound=verification["occupation_bound"],
            split_runs=split_runs,
            sigmas=verification["mc_sigmas"],
            seed=run.seed,
            batch_size=verification["batch_size"],
            jobs=run.jobs,
            log_path=ctx.obj["check_log"],
        )
        _print_checks(f"Occupation, level {level}", checks)
        if report is not None:
            write_json(verification_document("occupation", _resolved(ctx, run), checks).model_dump(mode="json", by_alias=True), report)
        _finish(checks)


@app.command()
def simulate(
    ctx: typer.Context,
    landscape: Path = typer.Argument(..., help="Landscape JSON file"),
    start: str = typer.Option(..., "--start", help="Start state label or id"),
    beta: float = typer.Option(..., "--beta"),
    hit: Optional[str] = typer.Option(None, "--hit", help="Stop on entering these states"),
    budget: Optional[float] = typer.Option(None, "--budget", min=0.0, help="Stop at this time"),
    seed: Optional[int] = typer.Option(None, "--seed", min=0),
    index: int = typer.Option(0, "--index", min=0, help="Trajectory index within the seed"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Write the trajectory JSON here"),
):
    """Simulate one continuous-time Metropolis trajectory."""
    with _guard():
        settings = _settings(ctx)
        L = _load(ctx, landscape)
        chosen_seed = seed if seed is not None else settings["verification"]["seed"]
        trajectory = simulate_trajectory(
            L,
            beta,
            parse_states(L, [start])[0],
            hit=parse_states(L, hit.split(",")) if hit else None,
            time_budget=budget,
            seed=chosen_seed,
            index=index,
        )
        document = {
            "seed": trajectory.seed,
            "index": index,
            "beta": beta,
            "stop_reason": trajectory.stop_reason,
            "final_state": L.labels[trajectory.final_state] or trajectory.final_state,
            "duration": trajectory.duration,
            "jumps": [[L.labels[s] or s, t] for s, t in trajectory.jumps],
        }
        if output is not None:
            write_json(document, output)
        else:
            typer.echo(dumps(document), nl=False)
        logger.info(f"{len(trajectory.jumps)} holding periods, stopped by {trajectory.stop_reason}")


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        rv = app(args=list(argv) if argv is not None else None, prog_name="metastable", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        return EXIT_CHECK_FAILED
    return rv if isinstance(rv, int) else 0
