"""Command implementations and the options they share."""

from pathlib import Path
from typing import Annotated, Any, Optional

import typer

from nonmarkov.config import RunConfig, resolve_configs
from nonmarkov.core.tcl_coefficients import CoefficientTrace, TclOrder, evaluate_trace
from nonmarkov.models.errors import ExitCode, handle_error
from nonmarkov.output import OutputFormat

FigureOption = Annotated[Optional[str], typer.Option("--figure", help="Figure preset, e.g. 1a, 2c or 4")]
ConfigOption = Annotated[Optional[Path], typer.Option("--config", help="key = value config file")]
OrderOption = Annotated[Optional[TclOrder], typer.Option("--order", help="TCL order")]
TmaxOption = Annotated[Optional[float], typer.Option("--tmax", help="End of the time window")]
GridOption = Annotated[Optional[int], typer.Option("--grid", help="Number of grid points")]
OutOption = Annotated[Optional[Path], typer.Option("--out", help="Output directory")]
FormatOption = Annotated[Optional[OutputFormat], typer.Option("-o", help="Output format")]


def output_format(override: Optional[OutputFormat]) -> OutputFormat:
    from nonmarkov.cli import get_output_format
    return override or get_output_format()


def verbose() -> bool:
    from nonmarkov.cli import is_verbose
    return is_verbose()


def run_configs(figure: Optional[str], config: Optional[Path], **flags: Any) -> list[RunConfig]:
    """Resolve run configs with the global --workers folded into the flags."""
    from nonmarkov.cli import get_workers
    return resolve_configs(figure, config_path=config, flags={"workers": get_workers(), **flags})


def run_config(figure: Optional[str], config: Optional[Path], **flags: Any) -> RunConfig:
    configs = run_configs(figure, config, **flags)
    if len(configs) != 1:
        handle_error(
            ExitCode.USAGE,
            f"figure {figure} covers several parameter sets",
            hint="nonmarkov positivity --figure 4",
        )
    return configs[0]


def compute_trace(cfg: RunConfig) -> CoefficientTrace:
    return evaluate_trace(
        cfg.params,
        cfg.time_grid,
        order=cfg.order,
        convention=cfg.convention,
        rtol_1d=cfg.rtol_1d,
        rtol_3d=cfg.rtol_3d,
        max_order=cfg.max_order,
        workers=cfg.workers,
        verbose=verbose(),
    )


def check_strict(traces: list[CoefficientTrace]) -> None:
    """Exit with the numerical code under --strict when any point was flagged."""
    from nonmarkov.cli import is_strict
    flagged = [t for trace in traces for t in trace.flagged]
    if is_strict() and flagged:
        handle_error(
            ExitCode.NUMERICAL,
            f"fourth-order cubature did not converge at {len(flagged)} grid points",
            detail=f"first at t={flagged[0]!r}",
            hint="raise max_order or rtol_3d",
        )
