"""Coefficient sweep command."""

from typing import Annotated, Optional

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
from nonmarkov.core.spectral import FrequencyConvention
from nonmarkov.core.tcl_coefficients import TRACE_HEADER
from nonmarkov.models.errors import error_boundary
from nonmarkov.output import diagnostic, format_output, write_csv


def coefficients(
    figure: FigureOption = None,
    config: ConfigOption = None,
    order: OrderOption = None,
    tmax: TmaxOption = None,
    grid: GridOption = None,
    out: OutOption = None,
    convention: Annotated[
        Optional[FrequencyConvention],
        typer.Option("--frequency-convention", help="Integrate the density over the full or half line"),
    ] = None,
    output: FormatOption = None,
):
    """Compute the TCL coefficient trace and write it as CSV."""
    with error_boundary():
        cfg = run_config(figure, config, order=order, tmax=tmax, grid=grid, out=out,
                         frequency_convention=convention)
        trace = compute_trace(cfg)
        path = write_csv(cfg.out / f"coefficients_{cfg.label}.csv", TRACE_HEADER, trace.to_rows())
        diagnostic(f"wrote {path}", verbose())

    format_output(
        {
            "label": cfg.label,
            "order": cfg.order.value,
            "points": len(trace),
            "csv": str(path),
            "flagged": trace.flagged,
            "max_cubature_error": float(trace.cubature_error.max()),
        },
        output_format(output),
    )
    check_strict([trace])
