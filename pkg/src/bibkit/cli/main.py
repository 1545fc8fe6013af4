"""
Main CLI Entry Point for bibkit

Every command prints a rich summary by default or a JSON document with
``--machine``. Errors raised by the library are rendered by the output
formatter and turn into exit status 1.
"""

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd
import typer
from rich.console import Console
from rich.logging import RichHandler

from ..applications import (
    EventTag,
    TrajectoryLog,
    dwell_statistics,
    perception_kernel,
    resolve_theta,
    run_control_walk,
    run_from_config,
    run_perception,
    run_walker,
    walk_statistics,
)
from ..config import ConfigManager
from ..core.exceptions import BIBError, ConfigurationError
from ..core.models import GridSpec, PartitionRecord, RunConfig
from ..core.storage import read_jsonl, write_jsonl, write_mask
from ..dynamics import (
    PolynomialMap,
    SwitchKernel,
    box_counting_dimension,
    build_partitions,
    extract_boundary,
    label_grid,
    measure_report,
    switch_kernel,
)
from ..dynamics.newton import load_grid, parse_coefficients, save_grid
from ..inference import rough_approximation
from .output_formatter import OutputFormatter, OutputMode

app = typer.Typer(
    help="bibkit - Newton basins, rough partitions and Bayesian / inverse-Bayesian inference",
    add_completion=False,
    rich_markup_mode="rich",
    context_settings={"help_option_names": ["-h", "--help"]},
)

console = Console()
err_console = Console(stderr=True)

MACHINE = typer.Option(False, "--machine", "-m", help="Output in machine-readable JSON format")
CONFIG_DIR = typer.Option(None, "--config-dir", "-c", help="Configuration directory path")
VERBOSE = typer.Option(False, "--verbose", "-v", help="Log progress at DEBUG level")


def _setup_logging(verbose: bool) -> None:
    logger = logging.getLogger("bibkit")
    logger.handlers.clear()
    handler = RichHandler(console=err_console, show_path=False, rich_tracebacks=True)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)


@contextmanager
def _session(machine: bool, verbose: bool, context: str) -> Iterator[OutputFormatter]:
    """Formatter for one command; library errors become a formatted message and exit 1."""
    _setup_logging(verbose)
    formatter = OutputFormatter(OutputMode.MACHINE if machine else OutputMode.USER, console)
    try:
        yield formatter
    except BIBError as e:
        formatter.output(formatter.format_error(e, context))
        raise typer.Exit(1)


def _parse_window(text: str) -> Tuple[float, float, float, float]:
    try:
        xmin, xmax, ymin, ymax = (float(v) for v in text.split(","))
    except ValueError:
        raise ConfigurationError(
            f"window must be 'xmin,xmax,ymin,ymax', got {text!r}", config_type="cli"
        )
    return xmin, xmax, ymin, ymax


def _parse_sizes(text: Optional[str]) -> Optional[List[int]]:
    if not text:
        return None
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise ConfigurationError(f"cannot parse box sizes {text!r}", config_type="cli")


@app.command()
def basins(
    out: Path = typer.Option(..., "--out", "-o", help="Pixmap (P6) to write; a .meta sidecar is added"),
    poly: Optional[str] = typer.Option(None, "--poly", help="Coefficients, constant term first, e.g. -1,0,0,1"),
    window: Optional[str] = typer.Option(None, "--window", help="xmin,xmax,ymin,ymax"),
    res: Optional[Tuple[int, int]] = typer.Option(None, "--res", help="Cells along the real and imaginary axes"),
    max_iters: Optional[int] = typer.Option(None, "--max-iters", help="Iteration budget per orbit"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Labeling threads"),
    machine: bool = MACHINE,
    config_dir: Optional[Path] = CONFIG_DIR,
    verbose: bool = VERBOSE,
):
    """
    Label a grid by the root each Newton orbit converges to.

    Cells whose orbit hits a critical point or exhausts the iteration budget
    are Unresolved and drawn black.
    """
    with _session(machine, verbose, "basins") as formatter:
        newton = ConfigManager(config_dir).get_newton()
        spec = newton.grid
        if window:
            xmin, xmax, ymin, ymax = _parse_window(window)
            spec = spec.model_copy(update=dict(xmin=xmin, xmax=xmax, ymin=ymin, ymax=ymax))
        if res:
            spec = spec.model_copy(update=dict(nx=res[0], ny=res[1]))
        spec = GridSpec.model_validate(spec.model_dump())
        coefficients = parse_coefficients(poly) if poly else tuple(newton.coefficients)
        polynomial = PolynomialMap(coefficients, floor_scale=newton.derivative_floor)

        grid = label_grid(
            polynomial,
            spec,
            max_iters=max_iters or newton.max_iters,
            convergence_radius=newton.convergence_radius,
            workers=workers or newton.workers,
        )
        pixmap, sidecar = save_grid(grid, out)
        report = measure_report(grid)
        formatter.output(
            formatter.format_summary(
                "basins",
                {
                    "pixmap": str(pixmap),
                    "metadata": str(sidecar),
                    "resolution": f"{grid.nx}x{grid.ny}",
                    "unresolved_fraction": report.unresolved_fraction,
                    "basin_fractions": {str(k): v for k, v in report.basin_fractions.items()},
                },
            )
        )


@app.command()
def dimension(
    pixmap: Path = typer.Option(..., "--in", "-i", help="Pixmap written by 'basins'"),
    sizes: Optional[str] = typer.Option(None, "--sizes", help="Box sizes in cells, e.g. 2,4,8,16"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="CSV of box_size,count; a .jsonl summary is added"),
    machine: bool = MACHINE,
    config_dir: Optional[Path] = CONFIG_DIR,
    verbose: bool = VERBOSE,
):
    """Box-counting dimension of the basin boundary."""
    with _session(machine, verbose, "dimension") as formatter:
        fractal = ConfigManager(config_dir).get_fractal()
        grid = load_grid(pixmap)
        mask = extract_boundary(grid)
        estimate = box_counting_dimension(
            mask,
            _parse_sizes(sizes),
            r2_warning=fractal.r2_warning,
            slope_min=fractal.slope_min,
            slope_max=fractal.slope_max,
        )
        values = {
            "slope": estimate.slope,
            "r2": estimate.r2,
            "boundary_fraction": mask.fraction,
            "box_sizes": list(estimate.box_sizes),
        }
        if out:
            pd.DataFrame({"box_size": estimate.box_sizes, "count": estimate.counts}).to_csv(
                out, index=False
            )
            summary = write_jsonl(out.with_suffix(".jsonl"), [estimate.to_record()])
            values.update(csv=str(out), summary=str(summary))
        formatter.output(formatter.format_summary("dimension", values))


@app.command()
def partition(
    pixmap: Path = typer.Option(..., "--in", "-i", help="Pixmap written by 'basins'"),
    basin: Optional[int] = typer.Option(None, "--basin", "-k", help="Designated basin index"),
    radius: Optional[int] = typer.Option(None, "--radius", "-r", help="Dilation radius in cells"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Kernel sampling seed"),
    samples: Optional[int] = typer.Option(None, "--samples", help="Kernel samples per row"),
    out_dir: Path = typer.Option(Path("."), "--out-dir", "-o", help="Directory for masks and the record"),
    machine: bool = MACHINE,
    config_dir: Optional[Path] = CONFIG_DIR,
    verbose: bool = VERBOSE,
):
    """
    Coarse-grain the basins into R-/R+ partitions and sample the switch kernel.

    Writes the inner, outer and uncertain masks of the designated basin and a
    JSON-lines record with theta (per basin) and the kernel.
    """
    with _session(machine, verbose, "partition") as formatter:
        settings = ConfigManager(config_dir).get_partition()
        basin = settings.basin if basin is None else basin
        radius = settings.dilation_radius if radius is None else radius
        seed = settings.seed if seed is None else seed
        samples = samples or settings.samples_per_row

        grid = load_grid(pixmap)
        partitions = build_partitions(grid, extract_boundary(grid), radius)
        if basin not in partitions:
            raise ConfigurationError(
                f"basin {basin} is absent from the grid (present: {sorted(partitions)})",
                config_type="cli",
            )
        kernel = switch_kernel(
            grid,
            list(partitions.values()),
            seed=seed,
            samples_per_row=samples,
            workers=settings.workers,
            chunk_size=settings.chunk_size,
        )
        chosen = partitions[basin]
        out_dir.mkdir(parents=True, exist_ok=True)
        for name in ("inner", "outer", "uncertain"):
            write_mask(out_dir / f"basin{basin}_{name}.ppm", getattr(chosen, name))
        thetas = {str(k): p.theta for k, p in partitions.items()}
        record = PartitionRecord(
            basin=basin,
            dilation_radius=radius,
            theta=chosen.theta,
            thetas=thetas,
            kernel=kernel.to_list(),
            samples=samples,
            seed=seed,
        )
        path = write_jsonl(out_dir / "partition.jsonl", [record])
        if formatter.machine:
            formatter.output({**formatter.format_kernel(kernel.to_list(), thetas), "record": str(path)})
        else:
            formatter.output(
                [
                    formatter.format_summary(
                        "partition",
                        {"basin": basin, "radius": radius, "theta": chosen.theta, "record": str(path)},
                    ),
                    formatter.format_kernel(kernel.to_list(), thetas),
                ]
            )


def _load_run(manager: ConfigManager, config: Optional[Path]) -> RunConfig:
    if config is None:
        return RunConfig(ib=manager.get_inference())
    return manager.load_run(config)


def _override(run: RunConfig, **updates) -> RunConfig:
    updates = {k: v for k, v in updates.items() if v is not None}
    return RunConfig.model_validate({**run.model_dump(), **updates}) if updates else run


@app.command()
def infer(
    config: Optional[Path] = typer.Option(None, "--config", "-f", help="key=value run file"),
    mode: Optional[str] = typer.Option(None, "--mode", help="bayes (B only) or bib"),
    steps: Optional[int] = typer.Option(None, "--steps", "-n", help="Number of data"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Run seed"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="CSV trajectory log"),
    records: Optional[Path] = typer.Option(None, "--records", help="JSON-lines final state"),
    machine: bool = MACHINE,
    config_dir: Optional[Path] = CONFIG_DIR,
    verbose: bool = VERBOSE,
):
    """
    Run the inference loop on a data stream.

    With [bold]--mode bayes[/bold] only the Bayesian update runs; [bold]bib[/bold]
    interlaces likelihood re-estimation and exploration.
    """
    with _session(machine, verbose, "infer") as formatter:
        manager = ConfigManager(config_dir)
        run = _override(_load_run(manager, config), mode=mode, steps=steps, seed=seed)
        theta = resolve_theta(run.ib, manager.get_newton(), manager.get_partition())
        state, log = run_from_config(run, theta=theta)

        values = {
            "mode": run.mode,
            "stream": run.stream,
            "theta": theta,
            "final_map": state.map_hypothesis,
            "posterior": state.posterior.as_dict(),
        }
        if out:
            values["log"] = str(log.to_csv(out))
        if records:
            rough = rough_approximation(state.relation)
            write_jsonl(
                records,
                [
                    state.posterior.to_record(),
                    state.likelihood.to_record(),
                    state.relation.to_record(),
                    rough.to_record(),
                ],
            )
            values["records"] = str(records)
        counts = {tag.value: log.count(tag) for tag in EventTag}
        if formatter.machine:
            formatter.output({**formatter.format_summary("infer", values), "events": counts})
        else:
            formatter.output(
                [formatter.format_summary("infer", values), formatter.format_events(counts, len(log))]
            )


def _read_kernel(path: Path) -> SwitchKernel:
    for record in read_jsonl(path):
        if "kernel" in record:
            return SwitchKernel(np.asarray(record["kernel"], dtype=float))
    raise ConfigurationError(f"{path} holds no kernel record", config_type="kernel")


@app.command()
def perceive(
    kernel_file: Optional[Path] = typer.Option(None, "--kernel", help="JSON-lines record from 'partition'"),
    from_partition: bool = typer.Option(False, "--from-partition", help="Build the kernel from the configured grid"),
    steps: Optional[int] = typer.Option(None, "--steps", "-n", help="Simulation steps"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Simulation seed"),
    noise: Optional[float] = typer.Option(None, "--noise", help="Uniform noise amplitude in [0, 1]"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="CSV trajectory log"),
    stats: Optional[Path] = typer.Option(None, "--stats", help="JSON-lines dwell statistics"),
    machine: bool = MACHINE,
    config_dir: Optional[Path] = CONFIG_DIR,
    verbose: bool = VERBOSE,
):
    """Simulate multistable perception driven by a switch kernel."""
    with _session(machine, verbose, "perceive") as formatter:
        if (kernel_file is None) == (not from_partition):
            raise ConfigurationError(
                "give exactly one of --kernel and --from-partition", config_type="cli"
            )
        manager = ConfigManager(config_dir)
        settings = manager.get_perception()
        partitions = None
        if kernel_file is not None:
            kernel = _read_kernel(kernel_file)
        else:
            kernel, partitions = perception_kernel(manager.get_newton(), manager.get_partition())

        log, dwell = run_perception(
            kernel,
            steps or settings.steps,
            settings.seed if seed is None else seed,
            noise_amplitude=settings.noise_amplitude if noise is None else noise,
            partitions=partitions,
        )
        if out:
            log.to_csv(out)
        record = dwell.to_record()
        if stats:
            write_jsonl(stats, [record])
        formatter.output(formatter.format_dwell(record.model_dump(mode="json")))


@app.command()
def walk(
    config: Optional[Path] = typer.Option(None, "--config", "-f", help="key=value run file"),
    steps: Optional[int] = typer.Option(None, "--steps", "-n", help="Walker steps"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Walker seed"),
    control: Optional[str] = typer.Option(None, "--control", help="memoryless or ballistic control walk"),
    ensemble: int = typer.Option(1, "--ensemble", help="Independent walkers averaged (controls only)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="CSV trajectory log"),
    stats: Optional[Path] = typer.Option(None, "--stats", help="JSON-lines diffusion statistics"),
    machine: bool = MACHINE,
    config_dir: Optional[Path] = CONFIG_DIR,
    verbose: bool = VERBOSE,
):
    """
    Walk in the plane, turning at every MAP switch or exploration.

    Reports the straight-run tail exponent and the MSD exponent.
    """
    with _session(machine, verbose, "walk") as formatter:
        manager = ConfigManager(config_dir)
        settings = manager.get_walker()
        n = steps or settings.steps
        s = settings.seed if seed is None else seed
        if control:
            log, diffusion = run_control_walk(control, n, s, ensemble=ensemble, lag_min=settings.lag_min)
        else:
            run = _load_run(manager, config)
            theta = resolve_theta(run.ib, manager.get_newton(), manager.get_partition())
            log, diffusion = run_walker(
                run, n, s, min_runs=settings.min_runs, lag_min=settings.lag_min, theta=theta
            )
        if out:
            log.to_csv(out)
        record = diffusion.to_record()
        if stats:
            write_jsonl(stats, [record])
        formatter.output(formatter.format_diffusion(record.model_dump(mode="json")))


@app.command()
def analyze(
    logs: List[Path] = typer.Argument(..., help="CSV logs written by perceive, infer or walk"),
    lag_min: Optional[int] = typer.Option(None, "--lag-min", help="Smallest MSD lag in the fit"),
    machine: bool = MACHINE,
    config_dir: Optional[Path] = CONFIG_DIR,
    verbose: bool = VERBOSE,
):
    """Recompute dwell or diffusion statistics from stored logs."""
    with _session(machine, verbose, "analyze") as formatter:
        settings = ConfigManager(config_dir).get_walker()
        loaded = [TrajectoryLog.from_csv(path) for path in logs]
        if all(log.has_positions for log in loaded):
            diffusion = walk_statistics(loaded, lag_min=lag_min or settings.lag_min)
            formatter.output(formatter.format_diffusion(diffusion.to_record().model_dump(mode="json")))
            return
        for path, log in zip(logs, loaded):
            dwell = dwell_statistics(log)
            result = formatter.format_dwell(dwell.to_record().model_dump(mode="json"))
            if formatter.machine:
                result["log"] = str(path)
            formatter.output(result)


@app.command()
def show_config(
    machine: bool = MACHINE,
    config_dir: Optional[Path] = CONFIG_DIR,
    verbose: bool = VERBOSE,
):
    """Show the effective settings after file and environment overrides."""
    with _session(machine, verbose, "show-config") as formatter:
        settings = ConfigManager(config_dir).get_settings()
        formatter.output(formatter.format_settings(settings))


def main():
    """Main entry point for the CLI."""
    app()


if __name__ == "__main__":
    main()
