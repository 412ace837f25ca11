"""Bloch trajectory command."""

from typing import Annotated

import typer

from nonmarkov.commands import (
    ConfigOption,
    FigureOption,
    FormatOption,
    GridOption,
    OrderOption,
    OutOption,
    TmaxOption,
    check_strict,
    compute_trace,
    output_format,
    run_config,
    verbose,
)
from nonmarkov.core.dynamics import BlochVector, RwaTrace, Trajectory, propagate, rwa_trace
from nonmarkov.models.errors import ConfigError, error_boundary
from nonmarkov.output import diagnostic, format_output, write_csv


def parse_bloch(text: str) -> BlochVector:
    """'bx,by,bz' to a Bloch vector."""
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError as e:
        raise ConfigError("initial state must be three comma-separated numbers",
                          detail=str(e))
    if len(values) != 3:
        raise ConfigError("initial state must be three comma-separated numbers",
                          detail=f"got {len(values)} values")
    return BlochVector(*values)


def trajectory(
    figure: FigureOption = None,
    config: ConfigOption = None,
    order: OrderOption = None,
    initial: Annotated[str, typer.Option("--initial", help="Initial Bloch vector bx,by,bz")] = "0,0,1",
    rwa: Annotated[bool, typer.Option("--rwa", help="Write the rotating-wave γ/Γ trace instead")] = False,
    tmax: TmaxOption = None,
    grid: GridOption = None,
    out: OutOption = None,
    output: FormatOption = None,
):
    """Propagate an initial state through the TCL Bloch equations."""
    traces = []
    with error_boundary():
        cfg = run_config(figure, config, order=order, tmax=tmax, grid=grid, out=out)
        if rwa:
            reference = rwa_trace(cfg.params, cfg.time_grid)
            path = write_csv(cfg.out / f"rwa_{cfg.label}.csv", RwaTrace.HEADER, reference.to_rows())
            result = {"csv": str(path), "Gamma_final": float(reference.gamma_accum[-1])}
        else:
            start = parse_bloch(initial)
            trace = compute_trace(cfg)
            traces.append(trace)
            evolution = propagate(start, trace, rtol=cfg.ode_rtol, verbose=verbose())
            path = write_csv(cfg.out / f"trajectory_{cfg.label}.csv", Trajectory.HEADER,
                             evolution.to_rows())
            final = evolution.final
            result = {"csv": str(path), "final": [final.bx, final.by, final.bz]}
        diagnostic(f"wrote {path}", verbose())

    format_output(result, output_format(output))
    check_strict(traces)
