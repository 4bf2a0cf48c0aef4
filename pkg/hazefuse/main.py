"""
hazefuse - command-line entry point
"""
import json
import logging
from pathlib import Path
from typing import Annotated, Callable, Optional

import typer

from hazefuse.analysis.metrics import compute_metrics
from hazefuse.analysis.plotting import RunPlotter
from hazefuse.analysis.weather_network import load_dictionary, save_dictionary
from hazefuse.core.exceptions import HazefuseError, MismatchedScenario, ParseError, ValidationError
from hazefuse.core.scenario import load_scenario, validate_scenario
from hazefuse.harness.event_log import EventLog
from hazefuse.harness.runner import RunSettings, SimulationRunner
from hazefuse.utils.config import ensure_directories, load_config
from hazefuse.utils.file_io import canonical_value, write_json
from hazefuse.utils.logging_setup import setup_logging

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_IO = 3

app = typer.Typer(help="Weather-adaptive multi-sensor fusion simulator for autonomous maritime vessels")

ConfigOption = Annotated[Optional[Path], typer.Option("--config", help="Optional .env file")]


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the documented process exit code"""
    if isinstance(error, (ValidationError, ParseError, MismatchedScenario)):
        return EXIT_VALIDATION
    if isinstance(error, OSError):
        return EXIT_IO
    return EXIT_FAILURE


def _execute(config_path: Optional[Path], action: Callable[[dict], int]) -> None:
    try:
        config = load_config(config_path)
        setup_logging(level=config["log_level"], log_file=config["log_file"])
    except HazefuseError as e:
        logging.basicConfig(level=logging.ERROR)
        logging.error(f"Invalid configuration: {e}")
        raise typer.Exit(EXIT_VALIDATION)

    logger = logging.getLogger(__name__)
    try:
        code = action(config)
    except (HazefuseError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        for line in getattr(e, "diagnostics", [])[1:]:
            logger.error(f"  {line}")
        raise typer.Exit(exit_code_for(e))
    raise typer.Exit(code)


@app.command()
def run(
    scenario: Annotated[Path, typer.Option("--scenario", help="Scenario JSON file")],
    log: Annotated[Path, typer.Option("--log", help="Event log to write (JSON Lines)")],
    seed: Annotated[Optional[int], typer.Option("--seed", help="Override the scenario seed")] = None,
    metrics: Annotated[Optional[Path], typer.Option("--metrics", help="Metrics report to write")] = None,
    save_dict: Annotated[
        Optional[Path],
        typer.Option("--save-dictionary", help="Write the learned weather dictionary here after the run"),
    ] = None,
    config_path: ConfigOption = None,
):
    """Run a scenario and write its event log."""

    def action(config: dict) -> int:
        logger = logging.getLogger(__name__)
        ensure_directories(config)
        loaded = load_scenario(scenario)
        network = load_dictionary(config["dictionary_path"])
        runner = SimulationRunner(loaded, network, RunSettings.from_config(config), seed=seed)
        with EventLog(log) as event_log:
            summary = runner.run(event_log)
        if metrics is not None:
            report = compute_metrics(log, runner.scenario)
            write_json(metrics, report.to_dict())
            logger.info(f"Metrics written to {metrics}")
        if save_dict is not None:
            save_dictionary(network, save_dict)
        typer.echo(
            f"{summary.ticks} ticks, {summary.records} records, {summary.alerts} alerts, "
            f"final weather {summary.final_template}"
        )
        return EXIT_OK

    _execute(config_path, action)


@app.command()
def validate(
    scenario: Annotated[Path, typer.Option("--scenario", help="Scenario JSON file")],
    config_path: ConfigOption = None,
):
    """Check a scenario file and list every violated invariant."""

    def action(config: dict) -> int:
        diagnostics = validate_scenario(scenario)
        for line in diagnostics:
            typer.echo(line)
        if diagnostics:
            return EXIT_VALIDATION
        typer.echo(f"{scenario}: ok")
        return EXIT_OK

    _execute(config_path, action)


@app.command("metrics")
def metrics_command(
    log: Annotated[Path, typer.Option("--log", help="Event log produced by run")],
    scenario: Annotated[Path, typer.Option("--scenario", help="Scenario the log was produced from")],
    out: Annotated[Optional[Path], typer.Option("--out", help="Also write the report to this file")] = None,
    config_path: ConfigOption = None,
):
    """Score an event log against its scenario's ground truth."""

    def action(config: dict) -> int:
        report = compute_metrics(log, scenario).to_dict()
        if out is not None:
            write_json(out, report)
        typer.echo(json.dumps(canonical_value(report), sort_keys=True, indent=2))
        return EXIT_OK

    _execute(config_path, action)


@app.command()
def plot(
    log: Annotated[Path, typer.Option("--log", help="Event log produced by run")],
    out: Annotated[Path, typer.Option("--out", help="PNG file to write")],
    config_path: ConfigOption = None,
):
    """Render the run summary figure."""

    def action(config: dict) -> int:
        RunPlotter().save(log, out)
        return EXIT_OK

    _execute(config_path, action)


if __name__ == "__main__":
    app()
