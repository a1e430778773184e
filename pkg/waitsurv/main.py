from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import typer
from pydantic import ValidationError
from rich.console import Console

from waitsurv import __version__
from waitsurv.config.loader import load_config
from waitsurv.config.models import AppConfig
from waitsurv.config.overrides import CliConfigOverrides
from waitsurv.domain.errors import DataError, FoldError, NumericalError, SearchError
from waitsurv.infrastructure.event_bus import EventBus
from waitsurv.pipeline.runner import CommandResult, execute, replay
from waitsurv.ui import report
from waitsurv.ui.dashboard import SearchDashboard
from waitsurv.ui.manager import UIManager
from waitsurv.ui.state import SearchState

app = typer.Typer(help="waitsurv - survival analysis of pedestrian waiting times", no_args_is_help=True)
console = Console()

EXIT_IO = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4
EXIT_INTERRUPTED = 130


def exit_code_for(exc: BaseException) -> int:
    """Exit code for a failed command: 2 IO/artifact, 3 data/validation, 4 numerical."""
    if isinstance(exc, FoldError):
        return exit_code_for(exc.cause)
    if isinstance(exc, (NumericalError, SearchError, ArithmeticError)):
        return EXIT_NUMERICAL
    if isinstance(exc, (DataError, ValidationError, ValueError)):
        return EXIT_DATA
    if isinstance(exc, OSError):
        return EXIT_IO
    return 1


def _version_callback(value: bool):
    if value:
        typer.echo(f"waitsurv {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: bool = typer.Option(
        False, "--version", callback=_version_callback, is_eager=True, help="Show version and exit"
    ),
):
    """Cox proportional hazards and deep survival models for waiting-time data."""


def _config_option():
    return typer.Option(None, "--config", "-c", help="Path to YAML config (defaults apply when omitted)")


def _out_dir_option():
    return typer.Option(Path("out"), "--out-dir", "-o", help="Directory for outputs, manifest and log")


def _seed_option():
    return typer.Option(None, "--seed", help="Master seed for every random stream (overrides config)")


def _folds_option():
    return typer.Option(None, "--folds", "-k", help="Cross-validation folds (default 10)")


def _debug_option():
    return typer.Option(False, "--debug/--no-debug", help="Enable verbose debug logging")


def _log_path_option():
    return typer.Option(None, "--log-path", help="Path to log file (overrides config)")


def _data_option():
    return typer.Option(..., "--data", "-d", help="Input CSV")


def _schema_option():
    return typer.Option(..., "--schema", "-s", help="Column schema YAML")


def _resolved(path: Optional[Path]) -> Optional[str]:
    return str(path.resolve()) if path is not None else None


def _resolve_config(config_path: Optional[Path], overrides: CliConfigOverrides) -> AppConfig:
    config = load_config(config_path) if config_path is not None else AppConfig()
    return overrides.apply(config) if overrides.has_overrides else config


def _run(
    command: str,
    arguments: Dict[str, Any],
    config_path: Optional[Path],
    overrides: CliConfigOverrides,
    out_dir: Path,
    show: Callable[[CommandResult], None],
    live_search: bool = False,
) -> None:
    """Resolve config, execute the command, print its report and map failures to exit codes."""
    try:
        config = _resolve_config(config_path, overrides)
        bus = EventBus()
        if live_search:
            state = SearchState()
            UIManager(bus, state)
            with SearchDashboard(state, console=console):
                result = execute(command, arguments, config, out_dir, bus=bus)
        else:
            result = execute(command, arguments, config, out_dir, bus=bus)
    except KeyboardInterrupt:
        typer.secho("\nInterrupted by user (Ctrl+C)", fg=typer.colors.YELLOW)
        raise typer.Exit(code=EXIT_INTERRUPTED)
    except typer.Exit:
        raise
    except Exception as exc:
        typer.secho(f"Error: {exc}", fg=typer.colors.RED, err=True)
        raise typer.Exit(code=exit_code_for(exc))

    show(result)
    console.print(f"Outputs written to [bold]{out_dir}[/] ({len(result.outputs)} files, manifest.yaml)")


@app.command()
def generate(
    spec: Path = typer.Option(..., "--spec", help="Synthetic data spec YAML"),
    out_dir: Path = _out_dir_option(),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the spec's seed"),
    config_path: Optional[Path] = _config_option(),
    debug: bool = _debug_option(),
    log_path: Optional[Path] = _log_path_option(),
):
    """Generate a synthetic proportional-hazards dataset with known ground truth."""
    overrides = CliConfigOverrides(seed=seed, debug=debug, log_path=_resolved(log_path))
    _run(
        "generate",
        {"spec": _resolved(spec), "seed": seed},
        config_path,
        overrides,
        out_dir,
        lambda result: report.show_generated(console, result.payload),
    )


@app.command()
def describe(
    data: Path = _data_option(),
    schema: Path = _schema_option(),
    bin_width: Optional[float] = typer.Option(None, "--bin-width", help="Histogram bin width in seconds"),
    out_dir: Path = _out_dir_option(),
    config_path: Optional[Path] = _config_option(),
    debug: bool = _debug_option(),
    log_path: Optional[Path] = _log_path_option(),
):
    """Mean waiting time per covariate level and a waiting-time histogram."""
    overrides = CliConfigOverrides(bin_width=bin_width, debug=debug, log_path=_resolved(log_path))
    _run(
        "describe",
        {"data": _resolved(data), "schema": _resolved(schema)},
        config_path,
        overrides,
        out_dir,
        lambda result: report.show_description(console, result.payload),
    )


@app.command("fit-linear")
def fit_linear(
    data: Path = _data_option(),
    schema: Path = _schema_option(),
    vif_threshold: Optional[float] = typer.Option(None, "--vif-threshold", help="Drop features above this VIF"),
    alpha: Optional[float] = typer.Option(None, "--alpha", help="Backward elimination significance level"),
    tolerance: Optional[float] = typer.Option(None, "--tolerance", help="Newton-Raphson step tolerance"),
    ridge: Optional[float] = typer.Option(None, "--ridge", help="Ridge penalty for near-singular designs"),
    folds: Optional[int] = _folds_option(),
    seed: Optional[int] = _seed_option(),
    out_dir: Path = _out_dir_option(),
    config_path: Optional[Path] = _config_option(),
    debug: bool = _debug_option(),
    log_path: Optional[Path] = _log_path_option(),
):
    """VIF screening, linear Cox fit, backward elimination and cross-validated C-index."""
    overrides = CliConfigOverrides(
        seed=seed,
        folds=folds,
        vif_threshold=vif_threshold,
        alpha=alpha,
        tolerance=tolerance,
        ridge=ridge,
        debug=debug,
        log_path=_resolved(log_path),
    )
    _run(
        "fit-linear",
        {"data": _resolved(data), "schema": _resolved(schema)},
        config_path,
        overrides,
        out_dir,
        lambda result: report.show_linear(console, result.payload),
    )


@app.command()
def rank(
    data: Path = _data_option(),
    schema: Path = _schema_option(),
    k_neighbors: Optional[int] = typer.Option(None, "--k-neighbors", help="RReliefF nearest neighbours"),
    m_samples: Optional[int] = typer.Option(None, "--m-samples", help="Instances to sample (default: all)"),
    sigma: Optional[float] = typer.Option(None, "--sigma", help="Neighbour influence width"),
    full_data: bool = typer.Option(False, "--full-data", help="Rank once on all rows instead of per fold"),
    folds: Optional[int] = _folds_option(),
    seed: Optional[int] = _seed_option(),
    out_dir: Path = _out_dir_option(),
    config_path: Optional[Path] = _config_option(),
    debug: bool = _debug_option(),
    log_path: Optional[Path] = _log_path_option(),
):
    """Rank features by RReliefF weight against the waiting time."""
    overrides = CliConfigOverrides(
        seed=seed,
        folds=folds,
        k_neighbors=k_neighbors,
        m_samples=m_samples,
        sigma=sigma,
        full_data=full_data,
        debug=debug,
        log_path=_resolved(log_path),
    )
    _run(
        "rank",
        {"data": _resolved(data), "schema": _resolved(schema)},
        config_path,
        overrides,
        out_dir,
        lambda result: report.show_ranking(console, result.payload),
    )


@app.command()
def search(
    data: Path = _data_option(),
    schema: Path = _schema_option(),
    space: Optional[Path] = typer.Option(None, "--space", help="Search-space YAML (default: config 'search')"),
    budget: Optional[int] = typer.Option(None, "--budget", help="Number of trials"),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", help="Trials run in parallel"),
    folds: Optional[int] = _folds_option(),
    seed: Optional[int] = _seed_option(),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="No live progress view"),
    out_dir: Path = _out_dir_option(),
    config_path: Optional[Path] = _config_option(),
    debug: bool = _debug_option(),
    log_path: Optional[Path] = _log_path_option(),
):
    """Random search over deep Cox architectures; resumes from an existing trial log."""
    overrides = CliConfigOverrides(
        seed=seed,
        folds=folds,
        jobs=jobs,
        budget=budget,
        debug=debug,
        log_path=_resolved(log_path),
    )
    _run(
        "search",
        {"data": _resolved(data), "schema": _resolved(schema), "space": _resolved(space), "budget": budget},
        config_path,
        overrides,
        out_dir,
        lambda result: report.show_search(console, result.payload),
        live_search=not quiet,
    )


@app.command()
def evaluate(
    bundles: List[Path] = typer.Option(..., "--bundle", "-b", help="Model bundle directory (repeatable)"),
    data: Path = _data_option(),
    out_dir: Path = _out_dir_option(),
    config_path: Optional[Path] = _config_option(),
    debug: bool = _debug_option(),
    log_path: Optional[Path] = _log_path_option(),
):
    """Score a dataset with saved bundles and compare their C-indices."""
    overrides = CliConfigOverrides(debug=debug, log_path=_resolved(log_path))
    _run(
        "evaluate",
        {"bundles": [_resolved(b) for b in bundles], "data": _resolved(data)},
        config_path,
        overrides,
        out_dir,
        lambda result: report.show_evaluation(console, result.payload),
    )


@app.command()
def compare(
    data: Path = _data_option(),
    schema: Path = _schema_option(),
    n_features: Optional[int] = typer.Option(None, "--n-features", help="Top-n features for the selected deep model"),
    epochs: Optional[int] = typer.Option(None, "--epochs", help="Training epochs for the deep models"),
    folds: Optional[int] = _folds_option(),
    seed: Optional[int] = _seed_option(),
    out_dir: Path = _out_dir_option(),
    config_path: Optional[Path] = _config_option(),
    debug: bool = _debug_option(),
    log_path: Optional[Path] = _log_path_option(),
):
    """Cross-validate linear CPH, deep CPH on all features and deep CPH on the top-n features."""
    overrides = CliConfigOverrides(
        seed=seed,
        folds=folds,
        n_features=n_features,
        epochs=epochs,
        debug=debug,
        log_path=_resolved(log_path),
    )
    _run(
        "compare",
        {"data": _resolved(data), "schema": _resolved(schema)},
        config_path,
        overrides,
        out_dir,
        lambda result: report.show_comparison(console, result.payload),
    )


@app.command("replay")
def replay_command(
    manifest: Path = typer.Argument(..., help="manifest.yaml of a previous run"),
    out_dir: Path = typer.Option(..., "--out-dir", "-o", help="Fresh directory for the re-run"),
):
    """Re-run a recorded command and verify its outputs are byte-identical."""
    try:
        result = replay(manifest, out_dir)
    except KeyboardInterrupt:
        typer.secho("\nInterrupted by user (Ctrl+C)", fg=typer.colors.YELLOW)
        raise typer.Exit(code=EXIT_INTERRUPTED)
    except Exception as exc:
        typer.secho(f"Error: {exc}", fg=typer.colors.RED, err=True)
        raise typer.Exit(code=exit_code_for(exc))
    typer.secho(
        f"Reproduced {result.command}: {len(result.outputs)} output file(s) match",
        fg=typer.colors.GREEN,
    )


if __name__ == "__main__":
    app()
